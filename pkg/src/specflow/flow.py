"""
Eigenvalue trajectories along rays and circles in tau, level curves |Q(z)| = 1/t and
set distances.

Branches of p_B(tau) are advanced by an RK4 predictor on d lambda/d tau = p_uv / (m_A' -
tau p_uv'), corrected by Newton, and relabelled against freshly computed roots by optimal
assignment. Collisions at critical points are crossed with the local Puiseux model.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import InputError
from .models import (
    CoverageResult,
    CriticalPoint,
    EventKind,
    LevelSet,
    PathKind,
    Polyline,
    SpectralPortrait,
    Trajectory,
    TrajectoryEvent,
    TrajectorySample,
)
from .perturbation import SystemLike, portrait_of, scaled_tol
from .poly import Poly, derivative, evaluate, raw_roots, roots

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 400
MAX_STEPS = 2**14
CRIT_BAND = 1e-4
COLLISION_TOL = 1e-6
CONSISTENCY_TOL = 1e-6
NEWTON_ITERS = 8
BISECTIONS = 52
DEFAULT_RESOLUTION = 256
LOCAL_CELLS = 8


def hausdorff(
    set_a: Sequence[complex] | np.ndarray, set_b: Sequence[complex] | np.ndarray
) -> float:
    """Symmetric Hausdorff distance between two finite point sets in the plane."""
    a = np.asarray(set_a, dtype=complex).ravel()
    b = np.asarray(set_b, dtype=complex).ravel()
    if a.size == 0 or b.size == 0:
        raise InputError("Hausdorff distance needs two nonempty sets")
    d = cdist(np.column_stack([a.real, a.imag]), np.column_stack([b.real, b.imag]))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def match(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Permutation p minimising sum |previous[i] - current[p[i]]|."""
    cost = np.abs(previous[:, None] - current[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(previous.size, dtype=int)
    out[rows] = cols
    return out


def cycles(perm: Sequence[int]) -> List[List[int]]:
    """Cycle decomposition of a permutation given as a list."""
    seen = set()
    out: List[List[int]] = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = []
        i = start
        while i not in seen:
            seen.add(i)
            cyc.append(i)
            i = perm[i]
        out.append(cyc)
    return out


@dataclass(frozen=True)
class _Crossing:
    """A parameter value where branches meet: a critical point or a frozen crossing."""

    param: float
    tau: complex
    z: complex
    order: int
    kind: EventKind
    critical: Optional[CriticalPoint] = None
    # Half-width of the parameter window jumped with the Puiseux model.
    band: float = 0.0


class _Tracker:
    """
    Moving roots of den - tau num, Q = num/den in lowest terms. The common roots of m_A and
    p_uv are roots of p_B for every tau and are reported as static instead.
    """

    def __init__(self, portrait: SpectralPortrait):
        self.num = portrait.q.num
        self.den = portrait.q.den
        self.dden = derivative(self.den) if self.den.degree >= 1 else Poly()
        self.dnum = derivative(self.num) if self.num.degree >= 1 else Poly()

    def p_b(self, tau: complex) -> Poly:
        return self.den - tau * self.num

    def velocity(self, lam: np.ndarray, tau: complex) -> np.ndarray:
        with np.errstate(all="ignore"):
            slope = evaluate(self.dden, lam) - tau * evaluate(self.dnum, lam)
            return evaluate(self.num, lam) / slope

    def rk4(self, lam: np.ndarray, tau0: complex, tau1: complex) -> np.ndarray:
        h = tau1 - tau0
        k1 = self.velocity(lam, tau0)
        k2 = self.velocity(lam + 0.5 * h * k1, tau0 + 0.5 * h)
        k3 = self.velocity(lam + 0.5 * h * k2, tau0 + 0.5 * h)
        k4 = self.velocity(lam + h * k3, tau1)
        out = lam + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        bad = ~np.isfinite(out)
        out[bad] = lam[bad]
        return out

    def newton(self, lam: np.ndarray, tau: complex) -> Tuple[np.ndarray, bool]:
        p = self.p_b(tau)
        dp = derivative(p)
        z = lam.copy()
        ok = False
        for _ in range(NEWTON_ITERS):
            with np.errstate(all="ignore"):
                step = evaluate(p, z) / evaluate(dp, z)
            if not np.all(np.isfinite(step)):
                return lam, False
            z = z - step
            if np.all(np.abs(step) <= 1e-12 * (1.0 + np.abs(z))):
                ok = True
                break
        return z, ok


def _min_separation(lam: np.ndarray) -> float:
    if lam.size < 2:
        return math.inf
    d = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(d, math.inf)
    return float(d.min())


def _accidental_crossings(portrait: SpectralPortrait) -> List[Tuple[complex, complex]]:
    """(c, tau_c) for accidentally frozen c where a moving branch passes through c."""
    out = []
    for f in portrait.accidental():
        if not f.warning:
            continue
        value = portrait.q(f.value)
        if value != 0 and np.isfinite(value):
            out.append((f.value, complex(1.0 / value)))
    return out


def _ray_crossings(
    portrait: SpectralPortrait, theta: float, t0: float, t1: float
) -> List[_Crossing]:
    direction = cmath.exp(1j * theta)
    out: List[_Crossing] = []
    for cp in portrait.critical:
        if math.isinf(cp.t) or not (t0 <= cp.t <= t1):
            continue
        if abs(cp.tau - cp.t * direction) <= CRIT_BAND * max(1.0, cp.t):
            band = CRIT_BAND * max(1.0, cp.t)
            out.append(
                _Crossing(cp.t, cp.tau, cp.z, cp.kappa_local, EventKind.COLLISION, cp, band)
            )
    for c, tau_c in _accidental_crossings(portrait):
        tc = abs(tau_c)
        if t0 <= tc <= t1 and abs(tau_c - tc * direction) <= CRIT_BAND * max(1.0, tc):
            out.append(_Crossing(tc, tau_c, c, 2, EventKind.FROZEN_CROSSING))
    return sorted(out, key=lambda c: c.param)


def _circle_crossings(portrait: SpectralPortrait, t: float) -> List[_Crossing]:
    out: List[_Crossing] = []
    items = [(cp.tau, cp.z, cp.kappa_local, EventKind.COLLISION, cp) for cp in portrait.critical]
    items += [
        (tc, c, 2, EventKind.FROZEN_CROSSING, None) for c, tc in _accidental_crossings(portrait)
    ]
    for tau, z, order, kind, cp in items:
        if not np.isfinite(abs(tau)) or abs(abs(tau) - t) > CRIT_BAND * max(1.0, t):
            continue
        theta = cmath.phase(tau) % (2.0 * math.pi)
        band = CRIT_BAND * max(1.0, t) / t if kind is EventKind.COLLISION else 0.0
        out.append(_Crossing(theta, tau, z, order, kind, cp, band))
        if theta <= band:
            out.append(_Crossing(theta + 2.0 * math.pi, tau, z, order, kind, cp, band))
    return sorted(out, key=lambda c: c.param)


def _puiseux_prediction(
    lam: np.ndarray,
    tau: complex,
    tau_after: complex,
    crossing: _Crossing,
    secant: np.ndarray,
) -> Tuple[np.ndarray, List[int]]:
    """
    Predicted positions after crossing: the branches meeting at z follow
    z + c (tau - tau_j)^(1/k) with c fitted before the crossing; the rest follow the secant.
    """
    pred = secant.copy()
    k = min(crossing.order, lam.size)
    idx = [int(i) for i in np.argsort(np.abs(lam - crossing.z))[:k]]
    before = tau - crossing.tau
    after = tau_after - crossing.tau
    for i in idx:
        if abs(before) == 0:
            pred[i] = crossing.z
        else:
            coeff = (lam[i] - crossing.z) / before ** (1.0 / k)
            pred[i] = crossing.z + coeff * after ** (1.0 / k)
    return pred, idx


def _track(
    portrait: SpectralPortrait,
    tau_of: Callable[[float], complex],
    s0: float,
    s1: float,
    steps: int,
    crossings: List[_Crossing],
) -> Tuple[List[TrajectorySample], List[TrajectoryEvent]]:
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    tracker = _Tracker(portrait)
    if tracker.den.degree < 1:
        # Nothing moves: every eigenvalue is static.
        return [TrajectorySample(param=s, tau=tau_of(s), positions=[]) for s in (s0, s1)], []
    seeds = raw_roots(tracker.p_b(tau_of(s0)))
    lam = seeds[np.lexsort((seeds.imag, seeds.real))]
    samples = [TrajectorySample(param=s0, tau=tau_of(s0), positions=list(lam))]
    events: List[TrajectoryEvent] = []
    span = s1 - s0
    h0 = span / steps
    h_min = span / MAX_STEPS
    eps_s = 1e-12 * max(1.0, abs(s1))
    history: List[Tuple[complex, np.ndarray]] = [(tau_of(s0), lam)]
    pending = list(crossings)
    s, h = s0, h0

    def accept(s_new: float, positions: np.ndarray) -> None:
        samples.append(TrajectorySample(param=s_new, tau=tau_of(s_new), positions=list(positions)))
        history.append((tau_of(s_new), positions))
        del history[:-2]

    while s < s1 - eps_s:
        while pending and pending[0].param + pending[0].band < s - eps_s:
            pending.pop(0)
        crossing = pending[0] if pending else None
        if crossing is not None and s >= crossing.param - crossing.band - eps_s:
            pending.pop(0)
            if crossing.kind is EventKind.FROZEN_CROSSING:
                nearest = int(np.argmin(np.abs(lam - crossing.z)))
                events.append(
                    TrajectoryEvent(
                        param=crossing.param,
                        tau=crossing.tau,
                        kind=crossing.kind,
                        z=crossing.z,
                        branches=[nearest],
                    )
                )
                continue
            s_after = min(crossing.param + crossing.band, s1)
            if s_after <= s + eps_s:
                continue
            tau, tau_after = tau_of(s), tau_of(s_after)
            if len(history) == 2 and history[1][0] != history[0][0]:
                (tp, lp), (tc, lc) = history
                secant = lc + (lc - lp) / (tc - tp) * (tau_after - tc)
            else:
                secant = lam.copy()
            pred, idx = _puiseux_prediction(lam, tau, tau_after, crossing, secant)
            fresh = raw_roots(tracker.p_b(tau_after), initial=pred)
            lam = fresh[match(pred, fresh)]
            events.append(
                TrajectoryEvent(
                    param=crossing.param,
                    tau=crossing.tau,
                    kind=crossing.kind,
                    z=crossing.z,
                    branches=idx,
                )
            )
            logger.debug("Collision at param %.6g, z=%s", crossing.param, crossing.z)
            s = s_after
            accept(s, lam)
            continue

        target = min(s + h, s1)
        if crossing is not None:
            target = min(target, crossing.param - crossing.band)
        tau0, tau1 = tau_of(s), tau_of(target)
        pred = tracker.rk4(lam, tau0, tau1)
        corr, ok = tracker.newton(pred, tau1)
        fresh = raw_roots(tracker.p_b(tau1), initial=corr)
        perm = match(corr, fresh)
        scale = 1.0 + float(np.max(np.abs(fresh)))
        consistent = float(np.max(np.abs(corr - fresh[perm]))) <= CONSISTENCY_TOL * scale
        separated = _min_separation(corr) > COLLISION_TOL * scale
        if ok and consistent and separated:
            lam = corr
        elif h > h_min:
            h /= 2.0
            continue
        else:
            lam = fresh[match(pred, fresh)]
            kind = EventKind.STEP_LIMIT if separated else EventKind.NEAR_COLLISION
            close = [int(i) for i in np.argsort(np.abs(lam - lam[0]))[:2]] if not separated else []
            events.append(
                TrajectoryEvent(
                    param=target,
                    tau=tau1,
                    kind=kind,
                    z=complex(lam[close[0]]) if close else 0j,
                    branches=close,
                )
            )
            logger.warning("%s at param %.6g (step %.2e)", kind.value, target, h)
        s = target
        accept(s, lam)
        h = min(2.0 * h, h0)
    return samples, events


def static_eigenvalues(portrait: SpectralPortrait) -> List[Tuple[complex, int]]:
    """Eigenvalues of B(tau) that do not depend on tau, with multiplicities."""
    out = [(f.value, f.multiplicity) for f in portrait.structural()]
    if portrait.puv.is_zero:
        return out + (roots(portrait.mA) if portrait.mA.degree >= 1 else [])
    return out + list(portrait.q.cancelled)


def trace_ray(
    sys: SystemLike,
    theta: float,
    t_range: Tuple[float, float],
    steps: int = DEFAULT_STEPS,
) -> Trajectory:
    """
    Branches of p_B(t e^{i theta}) for t in [t0, t1], t0 > 0.

    Samples follow the roots of the reduced den - tau num; eigenvalues that never move are
    listed once in ``static``.
    """
    t0, t1 = float(t_range[0]), float(t_range[1])
    if t0 <= 0 or t1 <= t0:
        raise InputError(f"Ray needs 0 < t0 < t1, got [{t0}, {t1}]")
    portrait = portrait_of(sys)
    direction = cmath.exp(1j * theta)
    crossings = _ray_crossings(portrait, theta, t0, t1)
    samples, events = _track(
        portrait,
        lambda s: s * direction,
        t0,
        t1,
        steps,
        crossings,
    )
    return Trajectory(
        path=PathKind.RAY,
        theta=theta,
        param_range=(t0, t1),
        samples=samples,
        events=events,
        static=static_eigenvalues(portrait),
        singular=[c.critical for c in crossings if c.critical is not None],
    )


def sweep_circle(sys: SystemLike, t: float, steps: int = DEFAULT_STEPS) -> Trajectory:
    """
    Branches of p_B(t e^{i theta}) for theta in [0, 2 pi] and the monodromy permutation:
    branch i starts at position i and ends at the starting position of branch monodromy[i].
    """
    if t <= 0:
        raise InputError(f"Circle radius must be positive, got {t}")
    portrait = portrait_of(sys)
    crossings = _circle_crossings(portrait, t)
    samples, events = _track(
        portrait,
        lambda s: t * cmath.exp(1j * s),
        0.0,
        2.0 * math.pi,
        steps,
        crossings,
    )
    start = np.asarray(samples[0].positions)
    end = np.asarray(samples[-1].positions)
    monodromy = [int(j) for j in match(end, start)] if start.size else []
    singular: List[CriticalPoint] = []
    for c in crossings:
        if c.critical is not None and c.critical not in singular:
            singular.append(c.critical)
    if singular:
        logger.info("Circle t=%.6g passes through %d critical point(s)", t, len(singular))
    return Trajectory(
        path=PathKind.CIRCLE,
        t=t,
        param_range=(0.0, 2.0 * math.pi),
        samples=samples,
        events=events,
        static=static_eigenvalues(portrait),
        monodromy=monodromy,
        singular=singular,
    )


def trajectory_residual(portrait: SpectralPortrait, trajectory: Trajectory) -> float:
    """
    max over samples of |p_B(tau)(lambda)| / (c (1 + |lambda|)^l), where
    c = max(1, ||m_A|| + |tau| ||p_uv||) uses the max-modulus coefficient norm.
    """
    worst = 0.0
    for s in trajectory.samples:
        lam = np.asarray(s.positions, dtype=complex)
        if lam.size == 0:
            continue
        p_b = portrait.mA - s.tau * portrait.puv
        scale = max(1.0, portrait.mA.norm() + abs(s.tau) * portrait.puv.norm())
        res = np.abs(evaluate(p_b, lam)) / (scale * (1.0 + np.abs(lam)) ** portrait.l)
        worst = max(worst, float(res.max()))
    return worst


def default_window(portrait: SpectralPortrait) -> Tuple[float, float, float, float]:
    """Square of half-width 2 + 2 max|p| centred on the mean of sigma(A) and the roots of p_uv."""
    pts = list(portrait.sigma_a())
    if portrait.puv.degree >= 1:
        pts += [r for r, _ in roots(portrait.puv)]
    arr = np.asarray(pts, dtype=complex) if pts else np.zeros(1, dtype=complex)
    centre = complex(arr.mean())
    half = 2.0 + 2.0 * float(np.abs(arr).max())
    return (centre.real - half, centre.real + half, centre.imag - half, centre.imag + half)


def _level_field(portrait: SpectralPortrait, t: float):
    num, den = portrait.q.num, portrait.q.den

    def field(z):
        return np.abs(evaluate(den, z)) - t * np.abs(evaluate(num, z))

    return field


def _bisect(field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    fa = field(a)
    for _ in range(BISECTIONS):
        m = 0.5 * (a + b)
        fm = field(m)
        same = np.sign(fm) == np.sign(fa)
        a = np.where(same, m, a)
        fa = np.where(same, fm, fa)
        b = np.where(same, b, m)
    return 0.5 * (a + b)


def level_set(
    portrait: SpectralPortrait,
    t: float,
    window: Optional[Tuple[float, float, float, float]] = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> LevelSet:
    """
    Marching-squares extraction of |den(z)| = t |num(z)| (Q = num/den in lowest terms) with
    bisection refinement on every crossed cell edge. Ambiguous saddle cells are resolved by
    the sign at the cell centre.
    """
    if t <= 0:
        raise InputError(f"Level t must be positive, got {t}")
    if resolution < 2:
        raise InputError(f"Resolution must be >= 2, got {resolution}")
    x0, x1, y0, y1 = window if window is not None else default_window(portrait)
    if x1 <= x0 or y1 <= y0:
        raise InputError(f"Degenerate window {(x0, x1, y0, y1)}")
    field = _level_field(portrait, t)
    xs = np.linspace(x0, x1, resolution + 1)
    ys = np.linspace(y0, y1, resolution + 1)
    grid = xs[None, :] + 1j * ys[:, None]
    pos = field(grid) > 0
    ny, nx = pos.shape

    # Edge ids: horizontal (i, j)-(i, j+1) is i*nx + j, vertical (i, j)-(i+1, j) adds offset.
    offset = ny * nx
    h_cross = pos[:, :-1] != pos[:, 1:]
    v_cross = pos[:-1, :] != pos[1:, :]
    hi, hj = np.nonzero(h_cross)
    vi, vj = np.nonzero(v_cross)
    a = np.concatenate([grid[hi, hj], grid[vi, vj]])
    b = np.concatenate([grid[hi, hj + 1], grid[vi + 1, vj]])
    ids = np.concatenate([hi * nx + hj, offset + vi * nx + vj])
    point_of: Dict[int, complex] = {}
    if ids.size:
        point_of = dict(zip(ids.tolist(), _bisect(field, a, b).tolist()))

    cell_any = h_cross[:-1, :] | h_cross[1:, :] | v_cross[:, :-1] | v_cross[:, 1:]
    segments: List[Tuple[int, int]] = []
    for i, j in zip(*np.nonzero(cell_any)):
        bottom, top = i * nx + j, (i + 1) * nx + j
        left, right = offset + i * nx + j, offset + i * nx + j + 1
        crossed = [e for e in (bottom, right, top, left) if e in point_of]
        if len(crossed) == 2:
            segments.append((crossed[0], crossed[1]))
        elif len(crossed) == 4:
            centre = 0.5 * (grid[i, j] + grid[i + 1, j + 1])
            if (field(centre) > 0) == pos[i, j]:
                segments += [(bottom, right), (top, left)]
            else:
                segments += [(left, bottom), (right, top)]

    polylines = _stitch(segments, point_of)
    band = CRIT_BAND * max(1.0, t)
    singular = [
        cp
        for cp in portrait.critical
        if abs(cp.t - t) <= band and x0 <= cp.z.real <= x1 and y0 <= cp.z.imag <= y1
    ]
    return LevelSet(t=t, window=(x0, x1, y0, y1), polylines=polylines, singular_points=singular)


def _stitch(segments: List[Tuple[int, int]], point_of: Dict[int, complex]) -> List[Polyline]:
    adj: Dict[int, List[int]] = {}
    for k, (p, q) in enumerate(segments):
        adj.setdefault(p, []).append(k)
        adj.setdefault(q, []).append(k)
    used = [False] * len(segments)

    def walk(start: int) -> Tuple[List[int], bool]:
        chain = [start]
        node = start
        while True:
            nxt = next((k for k in adj[node] if not used[k]), None)
            if nxt is None:
                return chain, False
            used[nxt] = True
            p, q = segments[nxt]
            node = q if p == node else p
            if node == start:
                return chain, True
            chain.append(node)

    out: List[Polyline] = []
    for node in [n for n, ks in adj.items() if len(ks) == 1]:
        if not all(used[k] for k in adj[node]):
            chain, _ = walk(node)
            out.append(Polyline(points=[point_of[n] for n in chain], closed=False))
    for k in range(len(segments)):
        if not used[k]:
            chain, closed = walk(segments[k][0])
            out.append(Polyline(points=[point_of[n] for n in chain], closed=closed))
    return out


def local_window(
    portrait: SpectralPortrait, z: complex, t: float, cell: float, cells: int = LOCAL_CELLS
) -> LevelSet:
    """Level set |Q| = 1/t on a square of 2 * cells cells of side ``cell`` centred at z."""
    half = cells * cell
    return level_set(
        portrait,
        t,
        window=(z.real - half, z.real + half, z.imag - half, z.imag + half),
        resolution=2 * cells,
    )


def branch_directions(
    portrait: SpectralPortrait,
    z: complex,
    t: float,
    radius: float = 1e-3,
    samples: int = 3600,
) -> List[float]:
    """Angles in [0, 2 pi) where the level curve |Q| = 1/t crosses the circle |w - z| = radius."""
    field = _level_field(portrait, t)
    phi = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    vals = field(z + radius * np.exp(1j * phi))
    flips = np.nonzero(np.sign(vals) != np.sign(np.roll(vals, -1)))[0]
    if flips.size == 0:
        return []
    lo = phi[flips]
    hi = lo + 2.0 * np.pi / samples

    def on_circle(angle):
        return field(z + radius * np.exp(1j * np.real(angle)))

    refined = np.real(_bisect(on_circle, lo.astype(complex), hi.astype(complex)))
    return sorted(float(a % (2.0 * np.pi)) for a in refined)


def coverage_probe(
    portrait: SpectralPortrait,
    z: complex,
    verify: bool = True,
    resolution: int = 512,
    window: Optional[Tuple[float, float, float, float]] = None,
) -> CoverageResult:
    """
    Place z in sigma(A), in the zero set of Q, or on the level set |Q| = 1/t. With
    ``verify`` the level curve is extracted on a local grid with the cell size of the
    full-window grid and z must lie within one cell diagonal of it.
    """
    tol = scaled_tol(portrait.system.A)
    sigma = portrait.sigma_a()
    if sigma.size and float(np.min(np.abs(sigma - z))) <= tol:
        return CoverageResult(category="in_sigma_A")
    q = portrait.q
    if q.num.is_zero:
        return CoverageResult(category="in_Qzero")
    if q.num.degree >= 1 and any(abs(r - z) <= tol for r, _ in roots(q.num)):
        return CoverageResult(category="in_Qzero")
    t = float(1.0 / abs(q(z)))
    if not verify:
        return CoverageResult(category="on_level", t=t)
    x0, x1, y0, y1 = window if window is not None else default_window(portrait)
    cell = max(x1 - x0, y1 - y0) / resolution
    pts = local_window(portrait, z, t, cell).points()
    distance = float(np.min(np.abs(pts - z))) if pts.size else math.inf
    return CoverageResult(
        category="on_level", t=t, located=distance <= math.sqrt(2.0) * cell, distance=distance
    )
