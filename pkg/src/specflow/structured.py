"""
H-selfadjoint and J-Hamiltonian rank-one families and the divergence forecast for the
Hamiltonian case.
"""

import logging
from typing import Iterable, List, Optional

import numpy as np

from .asymptotics import detect_kappa
from .errors import AsymptoticError, InputError, StructureError
from .flow import hausdorff
from .linalg import CMatrix, as_vector, eig_oracle, expand
from .models import (
    Axes,
    RankOneSystem,
    StructureContext,
    StructuredForecast,
    StructureKind,
    SymmetryReport,
    SymmetrySample,
)
from .perturbation import SystemLike, portrait_of

logger = logging.getLogger(__name__)

STRUCTURE_TOL = 1e-10
CONJUGATION_TOL = 1e-8
NEGATION_TOL = 1e-6


def make_structured_system(
    A: CMatrix | np.ndarray,
    u,
    ctx: StructureContext,
    name: Optional[str] = None,
) -> RankOneSystem:
    """System with the structure-compatible rank-one term u u^H H or u u^T J."""
    A = A if isinstance(A, CMatrix) else CMatrix(A)
    u = as_vector(u, A.n)
    if ctx.G.n != A.n:
        raise InputError(f"Structure matrix is {ctx.G.n}x{ctx.G.n}, A is {A.n}x{A.n}")
    residual = ctx.residual(A)
    bound = STRUCTURE_TOL * max(1.0, A.norm() * ctx.G.norm())
    if residual > bound:
        raise StructureError(
            f"A violates the {ctx.kind.value} relation: residual {residual:.2e} > {bound:.2e}"
        )
    if ctx.kind is StructureKind.J_HAMILTONIAN:
        if not A.is_real or np.any(u.imag):
            raise StructureError("J-Hamiltonian systems need real A and u")
        u = u.real.astype(complex)
    return RankOneSystem(A=A, u=u, v=ctx.derived_v(u), structure=ctx, name=name)


def _axes(K: int, sign: int) -> Axes:
    """Axes met by the K directions of lambda^K = s with sign(s) = sign."""
    real = sign > 0
    # (iy)^K = i^K y^K; i^K is +1 for K = 0 mod 4 and -1 for K = 2 mod 4.
    imaginary = (K % 4 == 0 and sign > 0) or (K % 4 == 2 and sign < 0)
    if real and imaginary:
        return Axes.MIXED
    if real:
        return Axes.REAL_PAIR
    if imaginary:
        return Axes.IMAGINARY_PAIR
    return Axes.OFF_AXIS


def hamiltonian_forecast(sys: SystemLike) -> StructuredForecast:
    """
    Number of divergent eigenvalues (kappa + 1, even) and the axes they follow as tau goes
    to +inf and -inf, read from the sign of the first nonzero moment u^T J A^kappa u.
    """
    portrait = portrait_of(sys)
    ctx = portrait.system.structure
    if ctx is None or ctx.kind is not StructureKind.J_HAMILTONIAN:
        raise InputError("Hamiltonian forecast needs a J-Hamiltonian system")
    model = detect_kappa(portrait)
    if model.degenerate:
        raise AsymptoticError("p_uv vanishes identically; no eigenvalue diverges")
    if model.kappa % 2 == 0:
        logger.warning(
            "Even kappa=%d for a J-Hamiltonian system; moments may be noisy", model.kappa
        )
    lead = float(model.lead.real)
    sign = 1 if lead > 0 else -1
    K = model.kappa + 1
    return StructuredForecast(
        count=K,
        kappa=model.kappa,
        lead=lead,
        sign=sign,
        plus_infinity=_axes(K, sign),
        minus_infinity=_axes(K, -sign),
    )


def verify_symmetry(sys: SystemLike, tau_samples: Iterable[complex]) -> SymmetryReport:
    """
    Spectral symmetries of B(tau): conjugation for real systems and H-selfadjoint ones at real
    tau, negation for J-Hamiltonian ones at real tau.
    """
    system = portrait_of(sys).system
    ctx = system.structure
    samples: List[SymmetrySample] = []
    for tau in tau_samples:
        tau = complex(tau)
        pts = expand(eig_oracle(system.matrix_at(tau)))
        scale = 1.0 + float(np.max(np.abs(pts)))
        real_tau = tau.imag == 0
        conj_err: Optional[float] = None
        neg_err: Optional[float] = None
        ok = True
        if real_tau and (system.is_real or (ctx and ctx.kind is StructureKind.H_SELFADJOINT)):
            conj_err = hausdorff(pts, pts.conj())
            ok &= conj_err <= CONJUGATION_TOL * scale
        if real_tau and ctx is not None and ctx.kind is StructureKind.J_HAMILTONIAN:
            neg_err = hausdorff(pts, -pts)
            ok &= neg_err <= NEGATION_TOL * scale
        samples.append(
            SymmetrySample(
                tau=tau, conjugation_error=conj_err, negation_error=neg_err, passed=bool(ok)
            )
        )
    return SymmetryReport(samples=samples, passed=all(s.passed for s in samples))
