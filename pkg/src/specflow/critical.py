"""
Critical points of Q, critical radii and the global-definability predicates.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import InputError
from .linalg import CMatrix
from .models import (
    CriticalPoint,
    DefinabilityMode,
    DefinabilityVerdict,
    RankOneSystem,
    RealWitness,
    SpectralPortrait,
    StructureKind,
)
from .perturbation import SystemLike, build_portrait, portrait_of, scaled_tol
from .poly import Poly, derivative, roots

logger = logging.getLogger(__name__)

DEF_TOL = 1e-8
REAL_AXIS_TOL = 1e-8
CRITICAL_RESIDUAL_TOL = 1e-6
PERSIST_DISTANCE = 1e-1


def q0_from(mA: Poly, puv: Poly) -> Poly:
    """p_uv' m_A - p_uv m_A', the numerator of Q' before cancellation."""
    return derivative(puv) * mA - puv * derivative(mA)


def q0_poly(portrait: SpectralPortrait) -> Poly:
    return portrait.q0


def critical_points(portrait: SpectralPortrait) -> List[CriticalPoint]:
    """
    Zeros of Q' that survive cancellation against the poles of Q.

    Works on the numerator of Q' in lowest terms; a remaining root sitting on a pole of the
    reduced Q (order m pole gives a root of order m - 1) is discarded.
    """
    q = portrait.q
    numer = q.derivative_numerator()
    if numer.degree < 1:
        return []
    tol = scaled_tol(portrait.system.A)
    frozen = [f.value for f in portrait.accidental()]
    out: List[CriticalPoint] = []
    for z, mult in roots(numer):
        if q.distance_to_poles(z) <= tol:
            continue
        derivs = q.derivatives(z, order=mult + 2)
        dtol = 1e-6 * max(1.0, abs(derivs[0]))
        if abs(derivs[1]) > CRITICAL_RESIDUAL_TOL * max(1.0, abs(derivs[0])):
            logger.warning("Critical point %s has |Q'| = %.2e after polish", z, abs(derivs[1]))
        kappa_local = next(
            (j for j in range(2, derivs.size) if abs(derivs[j]) > dtol), mult + 1
        )
        value = complex(derivs[0])
        if value == 0:
            t, tau = math.inf, complex(math.inf, 0.0)
        else:
            tau = 1.0 / value
            t = abs(tau)
        out.append(
            CriticalPoint(
                z=z,
                t=t,
                tau=tau,
                kappa_local=kappa_local,
                at_frozen=any(abs(z - f) <= tol for f in frozen),
            )
        )
    return sorted(out, key=lambda c: (c.t, round(c.z.real, 10), round(c.z.imag, 10)))


def definability(portrait: SpectralPortrait, mode: DefinabilityMode | str) -> DefinabilityVerdict:
    """
    real_ray: eigenvalues are global analytic functions of real tau when there are no
    accidentally frozen eigenvalues and no critical value Q(z_j) is real.
    unit_circle: eigenvalues of A + e^{i theta} u v^H are analytic in theta when no
    |Q(z_j)| equals one.
    """
    mode = DefinabilityMode(mode)
    if mode is DefinabilityMode.REAL_RAY:
        accidental = portrait.accidental()
        if accidental:
            return DefinabilityVerdict(
                mode=mode,
                definable=False,
                frozen_witness=accidental[0].value,
                reason="accidentally frozen eigenvalue",
            )
    for cp in portrait.critical:
        if math.isinf(cp.t):
            continue
        value = 1.0 / cp.tau
        if mode is DefinabilityMode.REAL_RAY:
            hit = abs(value.imag) <= DEF_TOL * (1.0 + abs(value))
            reason = "critical value Q(z) is real"
        else:
            hit = abs(abs(value) - 1.0) <= DEF_TOL * (1.0 + abs(value))
            reason = "critical value has |Q(z)| = 1"
        if hit:
            return DefinabilityVerdict(mode=mode, definable=False, witness=cp, reason=reason)
    return DefinabilityVerdict(mode=mode, definable=True)


def _real_candidates(portrait: SpectralPortrait) -> List[Tuple[float, float, float]]:
    tol = scaled_tol(portrait.system.A)
    sigma = portrait.sigma_a()
    found = []
    for cp in portrait.critical:
        if math.isinf(cp.t) or cp.kappa_local != 2:
            continue
        if abs(cp.z.imag) > REAL_AXIS_TOL * max(1.0, abs(cp.z)):
            continue
        if sigma.size and float(np.min(np.abs(sigma - cp.z))) <= tol:
            continue
        if abs(cp.tau.imag) > REAL_AXIS_TOL * max(1.0, abs(cp.tau)):
            continue
        found.append((cp.z.real, cp.tau.real, cp.t))
    # Positive tau0 first, then by critical radius.
    return sorted(found, key=lambda c: (c[1] <= 0, c[2], c[0]))


def _random_hermitian(rng: np.random.Generator, n: int, real: bool) -> np.ndarray:
    s = rng.standard_normal((n, n))
    if not real:
        s = s + 1j * rng.standard_normal((n, n))
    return (s + s.conj().T) / 2.0


def _nudge(vec: np.ndarray, rng: np.random.Generator, eps: float, real: bool) -> np.ndarray:
    d = rng.standard_normal(vec.size)
    if not real:
        d = d + 1j * rng.standard_normal(vec.size)
    return vec + eps * np.linalg.norm(vec) * d / np.linalg.norm(d)


def perturb_system(sys: RankOneSystem, rng: np.random.Generator, eps: float) -> RankOneSystem:
    """
    Relative perturbation of size eps; keeps real data real and keeps the H or J structure
    by moving A along G^-1 S with S Hermitian (H) or real symmetric (J).
    """
    from .structured import make_structured_system

    real = sys.is_real
    n = sys.n
    a = sys.A.data
    scale = max(sys.A.norm(), 1.0)
    if sys.structure is None:
        d = rng.standard_normal((n, n))
        if not real:
            d = d + 1j * rng.standard_normal((n, n))
        A = a + eps * scale * d / np.linalg.norm(d)
        return RankOneSystem(
            A=A,
            u=_nudge(sys.u, rng, eps, real),
            v=_nudge(sys.v, rng, eps, real),
            name=sys.name,
        )
    ctx = sys.structure
    real_s = real or ctx.kind is StructureKind.J_HAMILTONIAN
    direction = np.linalg.solve(ctx.G.data, _random_hermitian(rng, n, real_s))
    A = CMatrix(a + eps * scale * direction / np.linalg.norm(direction))
    return make_structured_system(A, _nudge(sys.u, rng, eps, real_s), ctx, name=sys.name)


def real_obstruction_witness(
    sys: SystemLike,
    probe: bool = True,
    seed: int = 0,
    eps: float = 1e-3,
) -> Optional[RealWitness]:
    """
    A real critical point x (Q'(x) = 0, Q''(x) != 0, x outside sigma(A)) with real
    tau0 = 1/Q(x): two eigenvalues meet on the real axis at tau0 and no analytic labelling
    exists there. Real systems qualify, as do H-selfadjoint and J-Hamiltonian ones, for which
    Q is real on the real axis.

    With ``probe`` the search is repeated on a perturbed system (structure-preserving when a
    structure is attached) and ``persists`` reports whether a witness stays within 0.1.
    """
    portrait = portrait_of(sys)
    system = portrait.system
    if system.structure is None and not system.is_real:
        raise InputError("Real obstruction search needs real A, u, v or a structured system")
    if (
        system.structure is not None
        and system.structure.kind is StructureKind.J_HAMILTONIAN
        and not system.is_real
    ):
        raise InputError("J-Hamiltonian obstruction search needs real A and u")
    candidates = _real_candidates(portrait)
    if not candidates:
        return None
    x, tau0, _ = candidates[0]
    if not probe:
        return RealWitness(x=x, tau0=tau0)
    rng = np.random.default_rng(seed)
    nearby = _real_candidates(build_portrait(perturb_system(system, rng, eps)))
    if not nearby:
        logger.info("Real witness (%.4g, %.4g) vanished under perturbation", x, tau0)
        return RealWitness(x=x, tau0=tau0, persists=False)
    px, ptau, _ = min(nearby, key=lambda c: max(abs(c[0] - x), abs(c[1] - tau0)))
    persists = max(abs(px - x), abs(ptau - tau0)) <= PERSIST_DISTANCE
    return RealWitness(x=x, tau0=tau0, persists=persists, perturbed_x=px, perturbed_tau0=ptau)


def definable_perturbation(
    sys: SystemLike,
    mode: DefinabilityMode | str,
    seed: int = 0,
    attempts: int = 10,
) -> Tuple[RankOneSystem, DefinabilityVerdict]:
    """
    Nearby definable system: v <- e^{i theta} v with theta in (0.01, 0.1) for real rays,
    v <- s v with s in (1.05, 1.5) for the unit circle. The structure context is dropped.
    """
    mode = DefinabilityMode(mode)
    base = portrait_of(sys).system
    rng = np.random.default_rng(seed)
    verdict: Optional[DefinabilityVerdict] = None
    candidate = base
    for _ in range(attempts):
        if mode is DefinabilityMode.REAL_RAY:
            factor = np.exp(1j * rng.uniform(0.01, 0.1))
        else:
            factor = rng.uniform(1.05, 1.5)
        candidate = RankOneSystem(A=base.A, u=base.u, v=factor * base.v, name=base.name)
        verdict = definability(build_portrait(candidate), mode)
        if verdict.definable:
            break
    assert verdict is not None
    return candidate, verdict
