"""
Large-|tau| behaviour: kappa + 1 eigenvalues diverge like tau^(1/(kappa+1)) and the others
converge to the roots of p_uv. Predictions are validated against the eigenvalue oracle.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import get_settings
from .errors import AsymptoticError, InputError
from .flow import hausdorff
from .linalg import eig_oracle, expand, moments
from .models import (
    AsymptoticModel,
    AsymptoticReport,
    BoundedBranch,
    BranchError,
    GroupSlope,
    SpectralPortrait,
)
from .perturbation import SystemLike, portrait_of, scaled_tol
from .poly import roots
from .utils import parallel_map

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-10
NOISE_FLOOR = 1e-11
SLOPE_SLACK = 0.1
FROZEN = "frozen"
UNBOUNDED = "unbounded"


def detect_kappa(sys: SystemLike) -> AsymptoticModel:
    """
    kappa is the first k <= l-1 with |v^H A^k u| above MOMENT_TOL * ||A||^k ||u|| ||v||.
    Fills the leading coefficients c_-1, c0 and the second-order c1 of the diverging branches.
    """
    portrait = portrait_of(sys)
    system = portrait.system
    l = portrait.l
    mom = moments(system.A, system.u, system.v, l + 1)
    a_norm = system.A.norm()
    uv = float(np.linalg.norm(system.u) * np.linalg.norm(system.v))
    kappa = next(
        (k for k in range(l) if abs(mom[k]) > MOMENT_TOL * a_norm**k * uv),
        None,
    )
    if kappa is None:
        logger.info("All moments vanish up to l-1=%d: spectrum is constant in tau", l - 1)
        return AsymptoticModel(
            kappa=l,
            lead=0j,
            c_minus1=0j,
            c0=0j,
            degenerate=True,
            l=l,
            a_norm=a_norm,
            moments=list(mom),
        )
    K = kappa + 1
    lead = complex(mom[kappa])
    c_minus1 = lead ** (1.0 / K)
    c0 = mom[kappa + 1] / (K * lead)
    c1 = (mom[kappa + 2] / lead - (K + 1) * mom[kappa + 1] ** 2 / (2 * K * lead**2)) / (
        K * c_minus1
    )
    if portrait.puv.degree != l - kappa - 1:
        logger.warning(
            "Degree law off: deg p_uv=%d, l-kappa-1=%d", portrait.puv.degree, l - kappa - 1
        )
    return AsymptoticModel(
        kappa=kappa,
        lead=lead,
        c_minus1=c_minus1,
        c0=complex(c0),
        c1=complex(c1),
        l=l,
        a_norm=a_norm,
        moments=list(mom),
    )


def printed_c1(model: AsymptoticModel) -> Optional[complex]:
    """
    c1 in the form (1/(k+1)) (v^H A^k u)^(-(k+2)/(k-1)) (v^H A^(k+2) u - (k+2) v^H A^(k+1) u),
    kept for comparison with the derived value; undefined at kappa = 1.
    """
    k = model.kappa
    if model.degenerate or k == 1:
        return None
    m = model.moments
    return complex(
        (1.0 / (k + 1)) * model.lead ** (-(k + 2) / (k - 1)) * (m[k + 2] - (k + 2) * m[k + 1])
    )


def _branch_roots(model: AsymptoticModel, tau: complex) -> np.ndarray:
    K = model.branches
    return complex(tau) ** (1.0 / K) * np.exp(2j * np.pi * np.arange(K) / K)


def unbounded_branches(
    model: AsymptoticModel,
    tau: complex,
    order: int = 1,
    tau_min: Optional[float] = None,
) -> List[complex]:
    """c_-1 mu_j + c0 (+ c1 / mu_j at order 2), mu_j the (kappa+1)-th roots of tau."""
    if model.degenerate:
        raise AsymptoticError("Degenerate model: no eigenvalue diverges")
    floor = model.tau_min if tau_min is None else tau_min
    if abs(tau) < floor:
        raise AsymptoticError(f"|tau| = {abs(tau):.3g} below the asymptotic range {floor:.3g}")
    mu = _branch_roots(model, tau)
    pts = model.c_minus1 * mu + model.c0
    if order >= 2:
        pts = pts + model.c1 / mu
    return [complex(p) for p in pts]


def predicted_derivative(model: AsymptoticModel, lam: complex) -> complex:
    """d lambda / d tau on a diverging branch: v^H A^kappa u / ((kappa+1) lambda^kappa)."""
    return model.lead / (model.branches * lam**model.kappa)


def _resolvent_power(portrait: SpectralPortrait, zeta: complex, power: int) -> complex:
    system = portrait.system
    shifted = zeta * np.eye(system.n) - system.A.data
    w = system.u.copy()
    for _ in range(power):
        w = np.linalg.solve(shifted, w)
    return complex(np.vdot(system.v, w))


def _cancelled_at(portrait: SpectralPortrait, zeta: complex, tol: float) -> Optional[int]:
    for root, k in portrait.q.cancelled:
        if abs(root - zeta) <= tol:
            return k
    return None


def bounded_branches(
    portrait: SpectralPortrait, model: Optional[AsymptoticModel] = None
) -> List[BoundedBranch]:
    """
    One branch per distinct root zeta of p_uv with multiplicity k and beta = Q^(k)(zeta)/k!.

    A root inside sigma(A) splits: the multiplicity it shares with m_A stays frozen, and the
    remaining k - shared eigenvalues approach zeta along the reduced Q.
    """
    puv = portrait.puv
    if puv.is_zero or (model is not None and model.degenerate):
        raise AsymptoticError("p_uv vanishes identically")
    if puv.degree < 1:
        return []
    tol = scaled_tol(portrait.system.A)
    sigma = portrait.sigma_a()
    out: List[BoundedBranch] = []
    for zeta, k in roots(puv):
        in_sigma = bool(sigma.size) and float(np.min(np.abs(sigma - zeta))) <= tol
        if in_sigma:
            shared = _cancelled_at(portrait, zeta, tol)
            if shared is None:
                logger.warning("Root %s of p_uv in sigma(A) but not cancelled from Q", zeta)
                shared = k
            out.append(BoundedBranch(zeta=zeta, k=min(shared, k), frozen=True))
            k -= min(shared, k)
            if k == 0:
                continue
        coeffs = portrait.q.taylor(zeta, k + 1)
        small = 1e-6 * max(1.0, float(np.abs(coeffs).max()))
        if np.any(np.abs(coeffs[:k]) > small):
            logger.warning("Q does not vanish to order %d at zeta=%s", k, zeta)
        out.append(
            BoundedBranch(
                zeta=zeta,
                k=k,
                beta=complex(coeffs[k]),
                gamma=complex(coeffs[k + 1]),
                resolvent_coefficient=None if in_sigma else _resolvent_power(portrait, zeta, k + 1),
            )
        )
    return out


def full_model(sys: SystemLike) -> AsymptoticModel:
    portrait = portrait_of(sys)
    model = detect_kappa(portrait)
    if model.degenerate:
        return model
    return model.model_copy(update={"bounded": bounded_branches(portrait, model)})


def _predictions(
    portrait: SpectralPortrait, model: AsymptoticModel, tau: complex, order: int
) -> Tuple[List[str], List[complex]]:
    groups: List[str] = []
    pts: List[complex] = []
    for p in unbounded_branches(model, tau, order=order, tau_min=0.0):
        groups.append(UNBOUNDED)
        pts.append(p)
    for j, branch in enumerate(model.bounded):
        label = FROZEN if branch.frozen else f"bounded:{j}"
        for p in branch.predict(tau, order=order):
            groups.append(label)
            pts.append(p)
    for f in portrait.structural():
        groups.extend([FROZEN] * f.multiplicity)
        pts.extend([f.value] * f.multiplicity)
    return groups, pts


def _match(pred: Sequence[complex], obs: np.ndarray) -> np.ndarray:
    cost = np.abs(np.asarray(pred)[:, None] - obs[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(len(pred), dtype=int)
    out[rows] = cols
    return out


def default_tau_grid(model: AsymptoticModel) -> List[float]:
    return [model.tau_min * f for f in (1.0, 10.0, 100.0)]


def validate_asymptotics(
    sys: SystemLike,
    model: Optional[AsymptoticModel] = None,
    tau_grid: Optional[Sequence[complex]] = None,
    order: int = 1,
    threads: Optional[int] = None,
) -> AsymptoticReport:
    """
    Match oracle eigenvalues of B(tau) to the predictions on every grid point and fit the
    log-log slope of the error per branch group. A group passes when its slope is at most
    -1/max(kappa+1, max k) + 0.1, or when all its errors sit at the rounding floor.
    """
    portrait = portrait_of(sys)
    system = portrait.system
    model = model if model is not None else full_model(portrait)
    grid = list(tau_grid) if tau_grid else default_tau_grid(model)
    if not grid:
        raise InputError("Empty tau grid")
    settings = get_settings()
    workers = threads if threads is not None else settings.max_workers
    nmax = settings.oracle_nmax
    uv = float(np.linalg.norm(system.u) * np.linalg.norm(system.v))

    if model.degenerate:
        base = expand(eig_oracle(system.A, nmax=nmax))
        dist = parallel_map(
            lambda tau: hausdorff(expand(eig_oracle(system.matrix_at(tau), nmax=nmax)), base),
            grid,
            workers,
        )
        worst = max(dist)
        ok = worst <= 1e-6 * (1.0 + system.A.norm())
        return AsymptoticReport(
            kappa=model.kappa,
            degenerate=True,
            order=order,
            max_error=worst,
            passed=ok,
            note="spectrum constant in tau: p_uv vanishes identically",
        )

    def one(tau: complex) -> List[BranchError]:
        groups, pred = _predictions(portrait, model, tau, order)
        obs = expand(eig_oracle(system.matrix_at(tau), nmax=nmax))
        if obs.size != len(pred):
            raise AsymptoticError(
                f"{obs.size} oracle eigenvalues but {len(pred)} predictions at tau={tau}"
            )
        match = _match(pred, obs)
        return [
            BranchError(
                tau=complex(tau),
                group=g,
                predicted=p,
                observed=complex(obs[match[i]]),
                error=float(abs(p - obs[match[i]])),
            )
            for i, (g, p) in enumerate(zip(groups, pred))
        ]

    rows = [r for chunk in parallel_map(one, grid, workers) for r in chunk]
    max_k = max([b.k for b in model.bounded if not b.frozen] or [1])
    bound = -1.0 / max(model.branches, max_k) + SLOPE_SLACK
    slopes = [_fit_slope(g, rows, system.A.norm(), uv, bound) for g in _ordered_groups(rows)]

    c1_fitted = _fit_c1(model, rows)
    report = AsymptoticReport(
        kappa=model.kappa,
        degenerate=False,
        order=order,
        rows=rows,
        slopes=slopes,
        max_error=max(r.error for r in rows),
        c1_derived=model.c1,
        c1_fitted=c1_fitted,
        c1_printed=printed_c1(model),
        sign_discrepancies=[b.zeta for b in model.bounded if b.sign_discrepancy],
        passed=all(s.passed for s in slopes),
    )
    logger.info(
        "Asymptotics kappa=%d: max error %.3e, slopes %s",
        model.kappa,
        report.max_error,
        {s.group: s.slope for s in slopes},
    )
    return report


def _ordered_groups(rows: Sequence[BranchError]) -> List[str]:
    seen: Dict[str, None] = {}
    for r in rows:
        seen.setdefault(r.group, None)
    return list(seen)


def _fit_slope(
    group: str, rows: Sequence[BranchError], a_norm: float, uv: float, bound: float
) -> GroupSlope:
    per_tau: Dict[complex, float] = {}
    for r in rows:
        if r.group == group:
            per_tau[r.tau] = max(per_tau.get(r.tau, 0.0), r.error)
    taus = list(per_tau)
    floors = [NOISE_FLOOR * (1.0 + a_norm + abs(t) * uv) for t in taus]
    exact = all(per_tau[t] <= f for t, f in zip(taus, floors))
    if group == FROZEN:
        return GroupSlope(group=group, slope=None, bound=bound, exact=exact, passed=exact)
    usable = [(abs(t), per_tau[t]) for t, f in zip(taus, floors) if per_tau[t] > f]
    if len(usable) < 2 or len({a for a, _ in usable}) < 2:
        return GroupSlope(group=group, slope=None, bound=bound, exact=exact, passed=True)
    x = np.log([a for a, _ in usable])
    y = np.log([e for _, e in usable])
    slope = float(np.polyfit(x, y, 1)[0])
    return GroupSlope(group=group, slope=slope, bound=bound, exact=exact, passed=slope <= bound)


def _fit_c1(model: AsymptoticModel, rows: Sequence[BranchError]) -> Optional[complex]:
    """c1 from (observed - c_-1 mu - c0) mu on the diverging branches at the largest |tau|."""
    unb = [r for r in rows if r.group == UNBOUNDED]
    if not unb:
        return None
    top = max(abs(r.tau) for r in unb)
    fits = []
    for r in unb:
        if abs(r.tau) != top:
            continue
        mus = _branch_roots(model, r.tau)
        mu = mus[int(np.argmin(np.abs(model.c_minus1 * mus + model.c0 - r.observed)))]
        fits.append((r.observed - model.c_minus1 * mu - model.c0) * mu)
    return complex(np.mean(fits)) if fits else None


def divergent_count(sys: SystemLike, tau: complex, kappa: int) -> int:
    """Oracle eigenvalues of B(tau) with modulus above |tau|^(1/(kappa+2))."""
    system = portrait_of(sys).system
    pts = expand(eig_oracle(system.matrix_at(tau), nmax=get_settings().oracle_nmax))
    return int(np.sum(np.abs(pts) > abs(tau) ** (1.0 / (kappa + 2))))
