import logging
import sys


def setup_logging(level: str) -> None:
    """
    Configure the root logger once with a compact stderr formatter.

    Log lines go to stderr so command summaries on stdout stay parseable. Python warnings
    (numpy runtime warnings in particular) are routed through logging.
    """
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s", datefmt="%H:%M:%S")
        )
        root.addHandler(handler)
    root.setLevel(level.upper())
    logging.captureWarnings(True)
