"""Exception hierarchy shared by the library and the CLI."""


class SpecflowError(ValueError):
    """Base class for every error raised by specflow."""


class InputError(SpecflowError):
    """Malformed input, dimension mismatch or an argument outside its range."""


class StructureError(InputError):
    """A matrix does not satisfy the declared H or J structure relation."""


class PoleError(SpecflowError):
    """Evaluation requested at (or numerically too close to) a pole of Q."""


class CrossCheckError(SpecflowError):
    """Two independent routes to the same quantity disagree."""


class OracleSizeError(SpecflowError):
    """Matrix is larger than the brute-force oracle accepts."""


class AsymptoticError(SpecflowError):
    """Asymptotic model cannot be applied (degenerate, |tau| too small, count mismatch)."""
