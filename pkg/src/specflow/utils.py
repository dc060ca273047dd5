import csv
import io
import json
import math
import os
import re
import tempfile
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def slugify_path(path: Path) -> str:
    """Filesystem-friendly slug from an input file name."""
    slug = re.sub(r"[^a-zA-Z0-9]+", "-", Path(path).stem).strip("-").lower()
    return slug or "system"


def ensure_parent(path: Path) -> None:
    """Create parent directories as needed."""
    path.parent.mkdir(parents=True, exist_ok=True)


def write_text_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename over the target."""
    ensure_parent(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def jsonable(obj: Any) -> Any:
    """
    Convert results into JSON-ready values: complex as [re, im], numpy scalars and arrays
    as Python values, polynomials as coefficient lists, matrices as rows, non-finite floats
    as strings.
    """
    from .linalg import CMatrix
    from .poly import Poly

    if hasattr(obj, "model_dump"):
        return jsonable(obj.model_dump())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Poly):
        return [jsonable(c) for c in obj.coeffs]
    if isinstance(obj, CMatrix):
        return [[jsonable(c) for c in row] for row in obj.data]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload: Any) -> None:
    """Write JSON with a stable, readable format."""
    write_text_atomic(path, json.dumps(jsonable(payload), indent=2, ensure_ascii=False) + "\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    write_text_atomic(path, buf.getvalue())


def read_text(path: Path) -> str:
    with path.open("r", encoding="utf-8") as f:
        return f.read()


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """Ordered map over a thread pool; runs inline for a single worker or item."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
