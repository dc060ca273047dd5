"""
Dense complex matrices: characteristic and minimal polynomials, moment sequences and the
brute-force eigenvalue oracle used for validation.
"""

import logging
from typing import List, Literal, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import InputError, OracleSizeError
from .poly import RootList, Poly, cluster_points, roots

logger = logging.getLogger(__name__)

REAL_TOL = 1e-14
MINPOLY_TOL = 1e-10
ORACLE_NMAX = 32


class CMatrix:
    """Square complex matrix with a cached real-entries flag."""

    __slots__ = ("_a", "_is_real")

    def __init__(self, entries: Sequence[Sequence[complex]] | np.ndarray):
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InputError(f"Expected a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("Matrix entries must be finite")
        arr.setflags(write=False)
        self._a = arr
        self._is_real = bool(np.all(np.abs(arr.imag) < REAL_TOL))

    @classmethod
    def identity(cls, n: int) -> "CMatrix":
        return cls(np.eye(n))

    @classmethod
    def jordan_block(cls, n: int, eigenvalue: complex = 0.0) -> "CMatrix":
        return cls(eigenvalue * np.eye(n) + np.eye(n, k=1))

    @property
    def data(self) -> np.ndarray:
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def is_real(self) -> bool:
        return self._is_real

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self._a))

    def rank_one_update(self, tau: complex, u: np.ndarray, v: np.ndarray) -> "CMatrix":
        """A + tau * u v^H."""
        return CMatrix(self._a + tau * np.outer(u, v.conj()))

    def __repr__(self) -> str:
        return f"CMatrix(n={self.n}, real={self.is_real})"


def as_vector(x: Sequence[complex] | np.ndarray, n: int | None = None) -> np.ndarray:
    vec = np.asarray(x, dtype=complex).ravel()
    if n is not None and vec.size != n:
        raise InputError(f"Vector of length {vec.size} does not match dimension {n}")
    return vec


def _scale(A: CMatrix) -> float:
    s = A.norm()
    return s if s > 0 else 1.0


def char_poly(A: CMatrix) -> Poly:
    """
    det(lambda I - A) by the Faddeev-LeVerrier recursion.

    The recursion runs on A / ||A|| and the coefficients are rescaled afterwards, which keeps
    the intermediate traces of order one.
    """
    n = A.n
    s = _scale(A)
    a = A.data / s
    eye = np.eye(n, dtype=complex)
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1.0
    M = np.zeros((n, n), dtype=complex)
    for k in range(1, n + 1):
        M = a @ M + coeffs[n - k + 1] * eye
        coeffs[n - k] = -np.trace(a @ M) / k
    coeffs = coeffs * s ** (n - np.arange(n + 1))
    return Poly(coeffs)


def minimal_poly(A: CMatrix, tol: float = MINPOLY_TOL) -> Poly:
    """
    Monic annihilating polynomial of least degree.

    Builds the Krylov matrix of vectorised powers [vec(I), vec(A), ...] of the scaled matrix
    and stops at the first degree whose column-normalised matrix has a relative singular value
    drop below ``tol``; the coefficients then come from a least-squares solve.
    """
    n = A.n
    s = _scale(A)
    a = A.data / s
    powers = [np.eye(n, dtype=complex).ravel()]
    current = np.eye(n, dtype=complex)
    for d in range(1, n + 1):
        current = current @ a
        powers.append(current.ravel())
        K = np.column_stack(powers)
        norms = np.linalg.norm(K, axis=0)
        if norms[-1] <= tol:
            coeffs = np.zeros(d + 1, dtype=complex)
            coeffs[d] = 1.0
            return _rescale(coeffs, s)
        sv = scipy.linalg.svdvals(K / norms)
        if sv[-1] <= tol * sv[0]:
            sol, *_ = scipy.linalg.lstsq(K[:, :d], -K[:, d])
            coeffs = np.append(sol, 1.0)
            logger.debug("Minimal polynomial degree %d (sigma ratio %.2e)", d, sv[-1] / sv[0])
            return _rescale(coeffs, s)
    # Cayley-Hamilton guarantees a dependency by degree n; reaching here means tol is too tight.
    logger.warning("No Krylov dependency detected at tol=%.1e; using char_poly", tol)
    return char_poly(A)


def _rescale(coeffs: np.ndarray, s: float) -> Poly:
    d = coeffs.size - 1
    return Poly(coeffs * s ** (d - np.arange(d + 1)))


def poly_at_matrix(p: Poly, A: CMatrix) -> np.ndarray:
    """Horner evaluation of p at a matrix argument."""
    n = A.n
    out = np.zeros((n, n), dtype=complex)
    for c in p.coeffs[::-1]:
        out = out @ A.data + c * np.eye(n)
    return out


def moments(A: CMatrix, u: np.ndarray, v: np.ndarray, kmax: int) -> np.ndarray:
    """(v^H A^0 u, ..., v^H A^kmax u) by repeated matrix-vector products."""
    if kmax < 0:
        raise InputError(f"kmax must be >= 0, got {kmax}")
    u = as_vector(u, A.n)
    v = as_vector(v, A.n)
    out = np.empty(kmax + 1, dtype=complex)
    w = u.copy()
    for k in range(kmax + 1):
        out[k] = np.vdot(v, w)
        w = A.data @ w
    return out


def eig_oracle(
    A: CMatrix,
    nmax: int = ORACLE_NMAX,
    method: Literal["lapack", "charpoly"] = "lapack",
) -> RootList:
    """
    Ground-truth eigenvalues with clustered multiplicities, for validation only.

    ``lapack`` runs ``numpy.linalg.eigvals`` and is independent of the polynomial routes it
    checks; ``charpoly`` takes roots of the characteristic polynomial.
    """
    if A.n > nmax:
        raise OracleSizeError(f"Oracle accepts n <= {nmax}, got n = {A.n}")
    if method == "charpoly":
        return roots(char_poly(A))
    if method != "lapack":
        raise InputError(f"Unknown oracle method: {method}")
    return sorted(cluster_points(np.linalg.eigvals(A.data)), key=lambda r: (r[0].real, r[0].imag))


def expand(root_list: RootList) -> np.ndarray:
    """Flatten (value, multiplicity) pairs into a point array with repetition."""
    pts: List[complex] = []
    for value, mult in root_list:
        pts.extend([value] * mult)
    return np.asarray(pts, dtype=complex)


def eigen_multiplicities(A: CMatrix, mA: Poly) -> List[Tuple[complex, int, int]]:
    """
    (eigenvalue, algebraic multiplicity, minimal-polynomial multiplicity) for each distinct
    eigenvalue; every root of char_poly is assigned to its nearest root of ``mA``.
    """
    distinct = roots(mA) if mA.degree >= 1 else []
    if not distinct:
        return []
    centres = np.array([r for r, _ in distinct])
    alg = np.zeros(len(distinct), dtype=int)
    for value, mult in roots(char_poly(A)):
        alg[int(np.argmin(np.abs(centres - value)))] += mult
    return [(r, int(a), m) for (r, m), a in zip(distinct, alg)]
