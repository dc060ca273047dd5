"""
Dense complex polynomials in ascending coefficient order.

Arithmetic and evaluation delegate to ``numpy.polynomial.polynomial``; roots come from an
Aberth-Ehrlich simultaneous iteration followed by multiplicity clustering.
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InputError

logger = logging.getLogger(__name__)

TRIM_TOL = 1e-12
CLUSTER_TOL = 1e-6
ABERTH_TOL = 1e-14
ABERTH_MAX_ITER = 500
# A root of multiplicity m computed in double precision spreads by roughly eps**(1/m).
SPREAD_EPS = 1e-13

RootList = List[Tuple[complex, int]]
Scalar = Union[int, float, complex]


class Poly:
    """Immutable polynomial; ``coeffs[k]`` multiplies lambda**k."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[Scalar] | np.ndarray = (), trim_tol: float = TRIM_TOL):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel().copy()
        if not np.all(np.isfinite(arr)):
            raise InputError("Polynomial coefficients must be finite")
        if arr.size:
            scale = float(np.abs(arr).max())
            if scale == 0.0:
                arr = arr[:0]
            else:
                keep = np.nonzero(np.abs(arr) > trim_tol * scale)[0]
                arr = arr[: keep[-1] + 1]
        arr.setflags(write=False)
        self._c = arr

    @classmethod
    def from_roots(cls, roots: Sequence[Scalar]) -> "Poly":
        return cls(P.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def constant(cls, value: Scalar) -> "Poly":
        return cls([value])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    @property
    def is_zero(self) -> bool:
        return self._c.size == 0

    @property
    def leading(self) -> complex:
        return complex(self._c[-1]) if self._c.size else 0j

    def monic(self) -> "Poly":
        if self.is_zero:
            raise InputError("Zero polynomial has no monic form")
        return Poly(self._c / self._c[-1])

    def norm(self) -> float:
        """Max-modulus coefficient norm."""
        return float(np.abs(self._c).max()) if self._c.size else 0.0

    def allclose(self, other: "Poly", tol: float = 1e-9) -> bool:
        """Coefficient-wise comparison relative to the larger of the two norms."""
        diff = (self - other).coeffs
        if diff.size == 0:
            return True
        return float(np.abs(diff).max()) <= tol * max(1.0, self.norm(), other.norm())

    def _lift(self, other: "Poly | Scalar") -> np.ndarray:
        if isinstance(other, Poly):
            return other._c if other._c.size else np.zeros(1, dtype=complex)
        return np.array([other], dtype=complex)

    def _own(self) -> np.ndarray:
        return self._c if self._c.size else np.zeros(1, dtype=complex)

    def __add__(self, other: "Poly | Scalar") -> "Poly":
        return Poly(P.polyadd(self._own(), self._lift(other)))

    __radd__ = __add__

    def __sub__(self, other: "Poly | Scalar") -> "Poly":
        return Poly(P.polysub(self._own(), self._lift(other)))

    def __rsub__(self, other: Scalar) -> "Poly":
        return Poly(P.polysub(self._lift(other), self._own()))

    def __mul__(self, other: "Poly | Scalar") -> "Poly":
        return Poly(P.polymul(self._own(), self._lift(other)))

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return Poly(-self._own())

    def __truediv__(self, scalar: Scalar) -> "Poly":
        if scalar == 0:
            raise InputError("Division of a polynomial by zero")
        return Poly(self._own() / scalar)

    def __divmod__(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if other.is_zero:
            raise InputError("Polynomial division by the zero polynomial")
        quo, rem = P.polydiv(self._own(), other._c)
        return Poly(quo), Poly(rem)

    def __call__(self, z):
        return evaluate(self, z)

    def to_list(self) -> List[complex]:
        return [complex(c) for c in self._c]

    def __repr__(self) -> str:
        terms = ", ".join(_fmt(c) for c in self._c)
        return f"Poly([{terms}])"


def _fmt(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.6g}"
    return f"{c.real:.6g}{c.imag:+.6g}j"


def evaluate(p: Poly, z):
    """Horner evaluation at a scalar or an array of points."""
    if p.is_zero:
        return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
    out = P.polyval(np.asarray(z, dtype=complex), p.coeffs)
    return complex(out) if np.ndim(out) == 0 else out


def derivative(p: Poly, order: int = 1) -> Poly:
    if order < 1:
        raise InputError(f"Derivative order must be >= 1, got {order}")
    if p.degree < order:
        return Poly()
    return Poly(P.polyder(p.coeffs, order), trim_tol=0.0)


def _aberth(
    monic: np.ndarray,
    initial: Optional[np.ndarray],
    seed: int,
    max_iter: int = ABERTH_MAX_ITER,
    tol: float = ABERTH_TOL,
) -> np.ndarray:
    n = monic.size - 1
    dmonic = P.polyder(monic)
    if initial is not None and initial.size == n:
        z = initial.astype(complex).copy()
    else:
        # Fujiwara bound on root moduli; start on a circle inside it.
        ks = np.arange(1, n + 1)
        bound = 2.0 * float(np.max(np.abs(monic[n - ks]) ** (1.0 / ks)))
        radius = max(bound / 2.0, 1e-3)
        rng = np.random.default_rng(seed)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + phase + 0.4))

    rng = np.random.default_rng(seed + 1)
    for it in range(max_iter):
        pv = P.polyval(z, monic)
        dv = P.polyval(z, dmonic)
        with np.errstate(all="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w[pv == 0] = 0.0
        bad = ~np.isfinite(w)
        if bad.any():
            w[bad] = 1e-8 * (1.0 + np.abs(z[bad])) * np.exp(2j * np.pi * rng.random(bad.sum()))
        z = z - w
        if float(np.max(np.abs(w) / np.maximum(1.0, np.abs(z)))) <= tol:
            logger.debug("Aberth converged in %d iterations (degree %d)", it + 1, n)
            break
    else:
        logger.debug("Aberth reached %d iterations without meeting tol (degree %d)", max_iter, n)
    return z


def raw_roots(p: Poly, initial: Optional[np.ndarray] = None, seed: int = 0) -> np.ndarray:
    """All ``p.degree`` roots, unclustered; exact zero roots are deflated first."""
    if p.degree < 1:
        raise InputError(f"Root finding needs degree >= 1, got {p.degree}")
    c = p.coeffs
    zeros = int(np.argmax(np.abs(c) > 0))
    c = c[zeros:]
    monic = c / c[-1]
    n = monic.size - 1
    if n == 0:
        found = np.zeros(0, dtype=complex)
    elif n == 1:
        found = np.array([-monic[0]], dtype=complex)
    else:
        seeds = None
        if initial is not None:
            nonzero = np.asarray(initial, dtype=complex)
            if zeros:
                nonzero = nonzero[np.argsort(np.abs(nonzero))][zeros:]
            seeds = nonzero if nonzero.size == n else None
        found = _aberth(monic, seeds, seed)
    return np.concatenate([np.zeros(zeros, dtype=complex), found])


def _threshold(size: int, centre: complex, cluster_tol: float) -> float:
    return max(cluster_tol, SPREAD_EPS ** (1.0 / size)) * max(1.0, abs(centre))


def cluster_points(
    points: Sequence[complex] | np.ndarray, cluster_tol: float = CLUSTER_TOL
) -> RootList:
    """
    Agglomerate nearby points into (centroid, count) pairs.

    Two groups merge when their centroids are within ``max(cluster_tol, SPREAD_EPS**(1/m))``
    relative to the merged centroid, m being the merged size.
    """
    groups: List[List[complex]] = [[complex(z)] for z in np.asarray(points, dtype=complex)]
    while True:
        best: Optional[Tuple[float, int, int]] = None
        cents = [complex(np.mean(g)) for g in groups]
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                d = abs(cents[i] - cents[j])
                size = len(groups[i]) + len(groups[j])
                merged = (cents[i] * len(groups[i]) + cents[j] * len(groups[j])) / size
                if d <= _threshold(size, merged, cluster_tol) and (best is None or d < best[0]):
                    best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        groups[i].extend(groups.pop(j))
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _newton(p: Poly, z: complex, steps: int = 4) -> complex:
    dp = derivative(p)
    best, best_res = z, abs(evaluate(p, z))
    for _ in range(steps):
        d = evaluate(dp, z)
        if d == 0:
            break
        z = z - evaluate(p, z) / d
        res = abs(evaluate(p, z))
        if res < best_res:
            best, best_res = z, res
    return best


def _sort_key(item: Tuple[complex, int]) -> Tuple[float, float]:
    return (round(item[0].real, 10), round(item[0].imag, 10))


def roots(p: Poly, cluster_tol: float = CLUSTER_TOL, seed: int = 0) -> RootList:
    """
    Roots with multiplicity estimates; multiplicities sum to ``p.degree``.

    Simple roots are polished by Newton on p. A cluster of size m is polished by Newton on
    the (m-1)-th derivative, where the multiple root becomes simple.
    """
    out: RootList = []
    for centre, mult in cluster_points(raw_roots(p, seed=seed), cluster_tol):
        target = p if mult == 1 else derivative(p, mult - 1)
        polished = _newton(target, centre)
        if abs(polished - centre) <= _threshold(mult, centre, cluster_tol):
            centre = polished
        out.append((centre, mult))
    return sorted(out, key=_sort_key)


def multiplicity_of(p: Poly, z: complex, tol: float) -> int:
    """Multiplicity of z among the clustered roots of p (0 when z is not a root)."""
    if p.degree < 1:
        return 0
    return sum(m for r, m in roots(p) if abs(r - z) <= tol)


def common_roots(p: Poly, q: Poly, tol: float) -> List[complex]:
    """Distinct roots of p lying within tol of some root of q."""
    if p.degree < 1:
        return []
    rp = [r for r, _ in roots(p)]
    if q.is_zero:
        return rp
    if q.degree < 1:
        return []
    rq = np.array([s for s, _ in roots(q)])
    return [r for r in rp if float(np.min(np.abs(rq - r))) <= tol]
