from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .linalg import CMatrix, as_vector
from .poly import Poly
from .rational import QFunction

STRUCTURE_TOL = 1e-10
NONSINGULAR_TOL = 1e-10

_RECORD = ConfigDict(extra="ignore", frozen=True, arbitrary_types_allowed=True)


class StructureKind(str, Enum):
    H_SELFADJOINT = "H_selfadjoint"
    J_HAMILTONIAN = "J_hamiltonian"


class StructureContext(BaseModel):
    """Indefinite inner product G: Hermitian H or real skew-symmetric J."""

    kind: StructureKind
    G: CMatrix

    model_config = _RECORD

    @field_validator("G", mode="before")
    @classmethod
    def _coerce_matrix(cls, value):
        return value if isinstance(value, CMatrix) else CMatrix(value)

    @model_validator(mode="after")
    def _check_form(self) -> "StructureContext":
        g = self.G.data
        scale = max(1.0, self.G.norm())
        if self.kind is StructureKind.H_SELFADJOINT:
            if np.linalg.norm(g - g.conj().T) > STRUCTURE_TOL * scale:
                raise ValueError("H must be Hermitian")
        else:
            if not self.G.is_real:
                raise ValueError("J must be real")
            if np.linalg.norm(g + g.T) > STRUCTURE_TOL * scale:
                raise ValueError("J must be skew-symmetric")
        if abs(np.linalg.det(g)) <= NONSINGULAR_TOL:
            raise ValueError(f"{self.kind.value} form must be nonsingular")
        return self

    def residual(self, A: CMatrix) -> float:
        """||HA - A^H H|| or ||JA + A^T J||."""
        g, a = self.G.data, A.data
        if self.kind is StructureKind.H_SELFADJOINT:
            return float(np.linalg.norm(g @ a - a.conj().T @ g))
        return float(np.linalg.norm(g @ a + a.T @ g))

    def derived_v(self, u: np.ndarray) -> np.ndarray:
        """v with u v^H = u u^H H (v = H^H u) or u v^T = u u^T J (v = J^T u = -J u)."""
        if self.kind is StructureKind.H_SELFADJOINT:
            return self.G.data.conj().T @ u
        return -(self.G.data @ u)


class RankOneSystem(BaseModel):
    """The family B(tau) = A + tau u v^H."""

    A: CMatrix
    u: np.ndarray
    v: np.ndarray
    structure: Optional[StructureContext] = None
    name: Optional[str] = None

    model_config = _RECORD

    @field_validator("A", mode="before")
    @classmethod
    def _coerce_matrix(cls, value):
        return value if isinstance(value, CMatrix) else CMatrix(value)

    @field_validator("u", "v", mode="before")
    @classmethod
    def _coerce_vector(cls, value):
        vec = as_vector(value)
        vec.setflags(write=False)
        return vec

    @model_validator(mode="after")
    def _check_shapes(self) -> "RankOneSystem":
        n = self.A.n
        if self.u.size != n or self.v.size != n:
            raise ValueError(
                f"Dimension mismatch: A is {n}x{n}, u has {self.u.size}, v has {self.v.size}"
            )
        if not np.any(self.u) or not np.any(self.v):
            raise ValueError("u and v must be nonzero")
        return self

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def is_real(self) -> bool:
        return self.A.is_real and not np.any(self.u.imag) and not np.any(self.v.imag)

    def matrix_at(self, tau: complex) -> CMatrix:
        return self.A.rank_one_update(tau, self.u, self.v)


class FrozenKind(str, Enum):
    STRUCTURAL = "structural"
    ACCIDENTAL = "accidental"


class EigenInfo(BaseModel):
    value: complex
    alg_mult: int
    min_mult: int

    model_config = _RECORD


class FrozenEigenvalue(BaseModel):
    """Eigenvalue of A that stays in the spectrum of B(tau) for every tau."""

    value: complex
    kind: FrozenKind
    # Structural: char multiplicity minus minimal-polynomial multiplicity.
    # Accidental: multiplicity shared by m_A and p_uv.
    multiplicity: int = 0
    # Accidental with no pole of Q left at the eigenvalue.
    warning: bool = False

    model_config = _RECORD


class CriticalPoint(BaseModel):
    """Zero z of Q' with critical radius t = 1/|Q(z)| and tau = 1/Q(z)."""

    z: complex
    t: float
    tau: complex
    kappa_local: int
    at_frozen: bool = False

    model_config = _RECORD


class SpectralPortrait(BaseModel):
    system: RankOneSystem
    mA: Poly
    puv: Poly
    q0: Poly
    q: QFunction
    eigsA: List[EigenInfo]
    frozen: List[FrozenEigenvalue]
    critical: List[CriticalPoint] = Field(default_factory=list)

    model_config = _RECORD

    @property
    def l(self) -> int:
        return self.mA.degree

    @property
    def a_norm(self) -> float:
        return self.system.A.norm()

    def sigma_a(self) -> np.ndarray:
        return np.array([e.value for e in self.eigsA], dtype=complex)

    def structural(self) -> List[FrozenEigenvalue]:
        return [f for f in self.frozen if f.kind is FrozenKind.STRUCTURAL]

    def accidental(self) -> List[FrozenEigenvalue]:
        return [f for f in self.frozen if f.kind is FrozenKind.ACCIDENTAL]


class DefinabilityMode(str, Enum):
    REAL_RAY = "real_ray"
    UNIT_CIRCLE = "unit_circle"


class DefinabilityVerdict(BaseModel):
    mode: DefinabilityMode
    definable: bool
    witness: Optional[CriticalPoint] = None
    frozen_witness: Optional[complex] = None
    reason: str = ""

    model_config = _RECORD


class RealWitness(BaseModel):
    """Real critical point x with real tau0 = 1/Q(x): eigenvalues collide on the real axis."""

    x: float
    tau0: float
    persists: Optional[bool] = None
    perturbed_x: Optional[float] = None
    perturbed_tau0: Optional[float] = None

    model_config = _RECORD


class BoundedBranch(BaseModel):
    """Eigenvalues converging to a root zeta of p_uv as |tau| grows."""

    zeta: complex
    k: int
    beta: Optional[complex] = None
    gamma: Optional[complex] = None
    frozen: bool = False
    # v^H (zeta I - A)^-(k+1) u, the resolvent-power form; equals (-1)^k beta.
    resolvent_coefficient: Optional[complex] = None

    model_config = _RECORD

    @property
    def sign_discrepancy(self) -> bool:
        return self.k % 2 == 1 and self.resolvent_coefficient is not None

    def radius(self, tau: complex) -> float:
        if self.beta is None:
            return 0.0
        return float(abs(tau * self.beta) ** (-1.0 / self.k))

    def predict(self, tau: complex, order: int = 1) -> List[complex]:
        if self.beta is None:
            return [self.zeta] * self.k
        omega = np.exp(2j * np.pi * np.arange(self.k) / self.k)
        eps = (1.0 / (tau * self.beta)) ** (1.0 / self.k) * omega
        pts = self.zeta + eps
        if order >= 2 and self.gamma is not None:
            pts = pts - (self.gamma / (self.k * self.beta)) * eps**2
        return [complex(p) for p in pts]


class AsymptoticModel(BaseModel):
    kappa: int
    lead: complex
    c_minus1: complex
    c0: complex
    c1: complex = 0j
    degenerate: bool = False
    l: int
    a_norm: float
    moments: List[complex]
    bounded: List[BoundedBranch] = Field(default_factory=list)

    model_config = _RECORD

    @property
    def branches(self) -> int:
        return self.kappa + 1

    @property
    def tau_min(self) -> float:
        return 10.0 * (1.0 + self.a_norm) ** (self.kappa + 1)


class PathKind(str, Enum):
    RAY = "ray"
    CIRCLE = "circle"


class EventKind(str, Enum):
    COLLISION = "collision"
    FROZEN_CROSSING = "frozen_crossing"
    NEAR_COLLISION = "near_collision"
    STEP_LIMIT = "step_limit"


class TrajectoryEvent(BaseModel):
    param: float
    tau: complex
    kind: EventKind
    z: complex
    branches: List[int]

    model_config = _RECORD


class TrajectorySample(BaseModel):
    param: float
    tau: complex
    positions: List[complex]

    model_config = _RECORD


class Trajectory(BaseModel):
    """Branches of p_B(tau) tracked along a ray (theta fixed) or circle (t fixed)."""

    path: PathKind
    theta: Optional[float] = None
    t: Optional[float] = None
    param_range: Tuple[float, float]
    samples: List[TrajectorySample]
    events: List[TrajectoryEvent] = Field(default_factory=list)
    # Structurally frozen eigenvalues: present for every tau, not roots of p_B.
    static: List[Tuple[complex, int]] = Field(default_factory=list)
    monodromy: Optional[List[int]] = None
    singular: List[CriticalPoint] = Field(default_factory=list)

    model_config = _RECORD

    @property
    def branch_count(self) -> int:
        return len(self.samples[0].positions) if self.samples else 0

    def branch(self, branch_id: int) -> np.ndarray:
        return np.array([s.positions[branch_id] for s in self.samples])

    def params(self) -> np.ndarray:
        return np.array([s.param for s in self.samples])


class Polyline(BaseModel):
    points: List[complex]
    closed: bool

    model_config = _RECORD


class LevelSet(BaseModel):
    t: float
    window: Tuple[float, float, float, float]
    polylines: List[Polyline]
    singular_points: List[CriticalPoint] = Field(default_factory=list)

    model_config = _RECORD

    def points(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros(0, dtype=complex)
        return np.concatenate([np.asarray(p.points, dtype=complex) for p in self.polylines])


class CoverageResult(BaseModel):
    category: Literal["in_sigma_A", "in_Qzero", "on_level"]
    t: Optional[float] = None
    located: Optional[bool] = None
    distance: Optional[float] = None

    model_config = _RECORD


class BranchError(BaseModel):
    tau: complex
    group: str
    predicted: complex
    observed: complex
    error: float

    model_config = _RECORD


class GroupSlope(BaseModel):
    group: str
    slope: Optional[float]
    bound: float
    exact: bool
    passed: bool

    model_config = _RECORD


class AsymptoticReport(BaseModel):
    kappa: int
    degenerate: bool
    order: int
    rows: List[BranchError] = Field(default_factory=list)
    slopes: List[GroupSlope] = Field(default_factory=list)
    max_error: float = 0.0
    c1_derived: Optional[complex] = None
    c1_fitted: Optional[complex] = None
    c1_printed: Optional[complex] = None
    sign_discrepancies: List[complex] = Field(default_factory=list)
    passed: bool = True
    note: str = ""

    model_config = _RECORD


class Axes(str, Enum):
    REAL_PAIR = "real_pair"
    IMAGINARY_PAIR = "imaginary_pair"
    MIXED = "mixed"
    OFF_AXIS = "off_axis"


class StructuredForecast(BaseModel):
    count: int
    kappa: int
    lead: float
    sign: int
    plus_infinity: Axes
    minus_infinity: Axes

    model_config = _RECORD


class SymmetrySample(BaseModel):
    tau: complex
    conjugation_error: Optional[float] = None
    negation_error: Optional[float] = None
    passed: bool

    model_config = _RECORD


class SymmetryReport(BaseModel):
    samples: List[SymmetrySample]
    passed: bool

    model_config = _RECORD


class NonnegReport(BaseModel):
    l: int
    index: int
    kappa: int
    check: bool
    empirical_count: Optional[int] = None

    model_config = _RECORD


class SuiteResult(BaseModel):
    name: str
    passed: bool
    skipped: bool = False
    detail: Dict[str, object] = Field(default_factory=dict)

    model_config = _RECORD


class VerifyReport(BaseModel):
    system: Optional[str] = None
    suites: List[SuiteResult]

    model_config = _RECORD

    @property
    def passed(self) -> bool:
        return all(s.passed or s.skipped for s in self.suites)


Entry = Union[float, Tuple[float, float]]


class StructureDocument(BaseModel):
    kind: Literal["H", "J"]
    G: List[List[Entry]]

    model_config = ConfigDict(extra="ignore", frozen=True)


class SystemDocument(BaseModel):
    """On-disk system: entries are real numbers or [re, im] pairs; v is omitted when structured."""

    A: List[List[Entry]]
    u: List[Entry]
    v: Optional[List[Entry]] = None
    structure: Optional[StructureDocument] = None
    name: Optional[str] = None

    model_config = ConfigDict(extra="ignore", frozen=True)

    @model_validator(mode="after")
    def _check_v(self) -> "SystemDocument":
        if self.structure is not None and self.v is not None:
            raise ValueError("'v' is derived from 'u' and the structure; leave it out")
        if self.structure is None and self.v is None:
            raise ValueError("'v' is required for an unstructured system")
        return self
