"""
Core objects of a rank-one family B(tau) = A + tau u v^H.

The perturbation polynomial p_uv = v^H m_A(lambda) (lambda I - A)^-1 u comes from the moment
formula and is cross-checked against interpolation of m_A * Q on a circle. Every eigenvalue of
B(tau) outside the structurally frozen ones is a root of p_B(tau) = m_A - tau p_uv.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import CrossCheckError, InputError, PoleError
from .linalg import CMatrix, eigen_multiplicities, minimal_poly, moments
from .models import (
    EigenInfo,
    FrozenEigenvalue,
    FrozenKind,
    RankOneSystem,
    SpectralPortrait,
)
from .poly import (
    CLUSTER_TOL,
    Poly,
    RootList,
    cluster_points,
    common_roots,
    multiplicity_of,
    raw_roots,
)
from .rational import QFunction

logger = logging.getLogger(__name__)

CROSSCHECK_TOL = 1e-8
MOMENT_ZERO_TOL = 1e-12
COLLAPSE_TAU = -1.0

SystemLike = Union[RankOneSystem, SpectralPortrait]


def scaled_tol(A: CMatrix, base: float = 1e-8) -> float:
    """Scale-aware tolerance base * (1 + ||A||) used for freezing and pole checks."""
    return base * (1.0 + A.norm())


def _coefficient_scale(sys: RankOneSystem, mA: Poly) -> float:
    growth = max(1.0, sys.A.norm()) ** mA.degree
    return float(np.linalg.norm(sys.u) * np.linalg.norm(sys.v) * np.abs(mA.coeffs).sum() * growth)


def _puv_from_moments(sys: RankOneSystem, mA: Poly) -> np.ndarray:
    l = mA.degree
    mom = moments(sys.A, sys.u, sys.v, max(l - 1, 0))
    m = mA.coeffs
    out = np.zeros(max(l, 1), dtype=complex)
    for i in range(l):
        out[i] = sum(m[k] * mom[k - i - 1] for k in range(i + 1, l + 1))
    return out


def _puv_from_resolvent(sys: RankOneSystem, mA: Poly) -> np.ndarray:
    """Interpolate m_A(z) Q(z) at l points on the circle |z| = 2(1 + ||A||) via the FFT."""
    l = max(mA.degree, 1)
    radius = 2.0 * (1.0 + sys.A.norm())
    nodes = radius * np.exp(2j * np.pi * np.arange(l) / l)
    eye = np.eye(sys.n)
    values = np.empty(l, dtype=complex)
    for s, z in enumerate(nodes):
        res = np.linalg.solve(z * eye - sys.A.data, sys.u)
        values[s] = np.vdot(sys.v, res) * mA(z)
    coeffs = np.fft.fft(values) / l
    # fft uses exp(-2 pi i jk/l); sample j of z^k carries exp(+2 pi i jk/l).
    return coeffs / radius ** np.arange(l)


def compute_puv(sys: RankOneSystem, mA: Poly | None = None) -> Poly:
    """p_uv by the moment formula, validated against the resolvent route."""
    mA = mA if mA is not None else minimal_poly(sys.A)
    primary = _puv_from_moments(sys, mA)
    check = _puv_from_resolvent(sys, mA)
    scale = _coefficient_scale(sys, mA)
    err = float(np.abs(primary - check).max()) / scale if scale > 0 else 0.0
    if err > CROSSCHECK_TOL:
        raise CrossCheckError(
            f"p_uv moment and resolvent routes disagree (relative {err:.2e} > {CROSSCHECK_TOL:.0e})"
        )
    if err > 1e-2 * CROSSCHECK_TOL:
        logger.warning("p_uv cross-check close to threshold: %.2e", err)
    primary[np.abs(primary) <= MOMENT_ZERO_TOL * scale] = 0.0
    return Poly(primary)


def build_portrait(sys: RankOneSystem) -> SpectralPortrait:
    """m_A, p_uv, Q, q0, frozen classification and critical points for one system."""
    from .critical import critical_points, q0_from

    mA = minimal_poly(sys.A)
    puv = compute_puv(sys, mA)
    tol = scaled_tol(sys.A)
    q = QFunction(mA, puv, cancel_tol=tol, pole_tol=tol)
    eigs = [
        EigenInfo(value=r, alg_mult=a, min_mult=m)
        for r, a, m in eigen_multiplicities(sys.A, mA)
    ]
    frozen = _classify(eigs, mA, puv, q, tol)
    portrait = SpectralPortrait(
        system=sys,
        mA=mA,
        puv=puv,
        q0=q0_from(mA, puv),
        q=q,
        eigsA=eigs,
        frozen=frozen,
    )
    portrait = portrait.model_copy(update={"critical": critical_points(portrait)})
    logger.debug(
        "Portrait %s: l=%d deg p_uv=%d frozen=%d critical=%d",
        sys.name or "", mA.degree, puv.degree, len(frozen), len(portrait.critical),
    )
    return portrait


def portrait_of(obj: SystemLike) -> SpectralPortrait:
    return obj if isinstance(obj, SpectralPortrait) else build_portrait(obj)


def _classify(
    eigs: Sequence[EigenInfo], mA: Poly, puv: Poly, q: QFunction, tol: float
) -> List[FrozenEigenvalue]:
    out: List[FrozenEigenvalue] = []
    for e in eigs:
        if e.alg_mult > e.min_mult:
            out.append(
                FrozenEigenvalue(
                    value=e.value, kind=FrozenKind.STRUCTURAL, multiplicity=e.alg_mult - e.min_mult
                )
            )
    structural = [f.value for f in out]
    for c in common_roots(mA, puv, tol):
        if any(abs(c - s) <= tol for s in structural):
            continue
        out.append(
            FrozenEigenvalue(
                value=c,
                kind=FrozenKind.ACCIDENTAL,
                multiplicity=_shared_multiplicity(c, mA, q, tol),
                warning=q.distance_to_poles(c) > tol,
            )
        )
    return out


def _shared_multiplicity(c: complex, mA: Poly, q: QFunction, tol: float) -> int:
    """Copies of c that never move: the multiplicity cancelled from Q, or all of it if p_uv = 0."""
    for root, k in q.cancelled:
        if abs(root - c) <= tol:
            return k
    return multiplicity_of(mA, c, tol)


def classify_frozen(sys: SystemLike) -> List[Tuple[complex, FrozenKind]]:
    return [(f.value, f.kind) for f in portrait_of(sys).frozen]


def q_eval(sys: SystemLike, z: complex, order: int = 0) -> np.ndarray:
    """(Q(z), Q'(z), ..., Q^(order)(z)); raises PoleError near an uncancelled root of m_A."""
    return portrait_of(sys).q.derivatives(z, order)


def perturbed_poly(sys: SystemLike, tau: complex) -> Poly:
    """p_B(tau) = m_A - tau p_uv."""
    p = portrait_of(sys)
    return p.mA - tau * p.puv


def spectrum(sys: SystemLike, tau: complex, cluster_tol: float = CLUSTER_TOL) -> RootList:
    """Roots of p_B(tau) together with the structurally frozen eigenvalues; total n."""
    p = portrait_of(sys)
    pts = list(raw_roots(perturbed_poly(p, tau)))
    for f in p.structural():
        pts.extend([f.value] * f.multiplicity)
    return sorted(cluster_points(pts, cluster_tol), key=lambda r: (r[0].real, r[0].imag))


def multiplicity_at(
    sys: SystemLike, tau0: complex, lambda0: complex, tol: float | None = None
) -> int:
    """
    Algebraic multiplicity of lambda0 as an eigenvalue of B(tau0), lambda0 outside sigma(A):
    the first kappa with Q(lambda0) = 1/tau0, vanishing Q' .. Q^(kappa-1) and Q^(kappa) != 0.
    """
    p = portrait_of(sys)
    pole_tol = scaled_tol(p.system.A)
    sigma = p.sigma_a()
    if sigma.size and float(np.min(np.abs(sigma - lambda0))) <= pole_tol:
        raise PoleError(f"lambda0 = {lambda0} is within {pole_tol:.1e} of sigma(A)")
    if tau0 == 0:
        return 0
    derivs = p.q.derivatives(lambda0, order=p.l + 1)
    tol = tol if tol is not None else 1e-6 * max(1.0, abs(derivs[0]))
    if abs(derivs[0] - 1.0 / tau0) > tol:
        return 0
    kappa = 1
    while kappa < derivs.size - 1 and abs(derivs[kappa]) <= tol:
        kappa += 1
    return kappa


def companion_collapse_system(a: Sequence[complex]) -> RankOneSystem:
    """
    Companion matrix with last row a, u = e_n and v = conj(a).

    B(tau) has last row (1 + tau) a, so B(COLLAPSE_TAU) is the nilpotent Jordan block J_n(0).
    """
    coeffs = np.asarray(a, dtype=complex).ravel()
    if coeffs.size < 1:
        raise InputError("Companion construction needs at least one coefficient")
    if np.any(coeffs == 0):
        raise InputError("Companion coefficients must all be nonzero")
    n = coeffs.size
    A = np.eye(n, k=1, dtype=complex)
    A[-1, :] += coeffs
    u = np.zeros(n, dtype=complex)
    u[-1] = 1.0
    return RankOneSystem(A=A, u=u, v=coeffs.conj(), name=f"companion-{n}")
