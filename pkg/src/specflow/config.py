import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    threads: int = Field(default=0, ge=0, alias="SPECFLOW_THREADS")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    oracle_nmax: int = Field(default=32, ge=1, alias="SPECFLOW_ORACLE_NMAX")
    data_dir: Path = Field(default=Path("data"), alias="SPECFLOW_DATA_DIR")
    seed: int = Field(default=0, alias="SPECFLOW_SEED")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    @property
    def max_workers(self) -> int:
        """Thread cap for internal parallelism; 0 means one worker per CPU."""
        return self.threads or (os.cpu_count() or 1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Load and cache settings from environment and .env."""
    return Settings()
