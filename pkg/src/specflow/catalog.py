"""
Named example systems and seeded random generators.

The same builders back the test suite, ``specflow verify`` and the ``fixtures`` command,
so every consumer sees identical data.
"""

from typing import Callable, Dict, List

import numpy as np

from .errors import InputError
from .linalg import CMatrix
from .models import RankOneSystem, StructureContext, StructureKind
from .perturbation import companion_collapse_system
from .structured import make_structured_system


def ray_example() -> RankOneSystem:
    """Real 2x2 system with critical points 0 (t=1) and -2 (t=3)."""
    return RankOneSystem(A=[[0, 1], [-1, -1]], u=[0, 1], v=[1, 1], name="ray")


def companion_example() -> RankOneSystem:
    """Companion matrix of last row (1, -1, 1); collapses to J_3(0) at tau = -1."""
    return companion_collapse_system([1, -1, 1]).model_copy(update={"name": "companion"})


def frozen_example() -> RankOneSystem:
    """Eigenvalues 1 and 2 stay put for every tau; the third is tau + 1."""
    A = [[1, 1, 0], [0, 1, 0], [0, 0, 2]]
    return RankOneSystem(A=A, u=[1, 0, 0], v=[1, 0, 0], name="frozen")


def jordan_example(n: int = 4) -> RankOneSystem:
    """J_n(0) with u = e_n, v = e_1: B(tau) has the n-th roots of tau as eigenvalues."""
    u = np.zeros(n)
    v = np.zeros(n)
    u[-1] = 1.0
    v[0] = 1.0
    return RankOneSystem(A=CMatrix.jordan_block(n), u=u, v=v, name=f"jordan{n}")


def nonneg_example() -> RankOneSystem:
    """ones(2) with u = e_1, v = e_2: eigenvalues 1 +- sqrt(1 + tau)."""
    return RankOneSystem(A=np.ones((2, 2)), u=[1, 0], v=[0, 1], name="nonneg")


HAMILTONIAN_J = [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]]


def hamiltonian_example() -> RankOneSystem:
    """J-Hamiltonian 4x4 with moments (0, 0, 0, -4): four eigenvalues diverge."""
    A = [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, -1, 1], [0, 0, 0, -1]]
    ctx = StructureContext(kind=StructureKind.J_HAMILTONIAN, G=HAMILTONIAN_J)
    return make_structured_system(A, [0, 1, 1, 1], ctx, name="hamiltonian")


def complex_example() -> RankOneSystem:
    """Complex 4x4 with a Jordan block at 4, used for level-curve pictures."""
    A = np.zeros((4, 4))
    A[0, 0] = -2.0
    A[2, 2] = A[3, 3] = 4.0
    A[2, 3] = 1.0
    u = [-0.2 + 0.7j, 1.5 - 1.2j, 1.5 + 0.5j, 1.5 + 1.5j]
    v = [0.5 + 0.3j, 1 - 0.8j, 0.8 + 0.9j, -0.3 - 1.2j]
    return RankOneSystem(A=A, u=u, v=v, name="complex4")


def degenerate_example() -> RankOneSystem:
    """I_2 with u = e_2, v = e_1: p_uv vanishes and the spectrum never moves."""
    return RankOneSystem(A=np.eye(2), u=[0, 1], v=[1, 0], name="degenerate")


def block_example() -> RankOneSystem:
    """0 (+) J_2(1) with u = v = e_1: eigenvalues tau and 1, the latter accidentally frozen."""
    A = [[0, 0, 0], [0, 1, 1], [0, 0, 1]]
    return RankOneSystem(A=A, u=[1, 0, 0], v=[1, 0, 0], name="block")


def jordan_chain_example() -> RankOneSystem:
    """B(tau) = [[1, 1], [0, tau]]: Q = 1/lambda and a Jordan block of size 2 at tau = 1."""
    return RankOneSystem(A=[[1, 1], [0, 0]], u=[0, 1], v=[0, 1], name="jordan-chain")


CATALOG: Dict[str, Callable[[], RankOneSystem]] = {
    "ray": ray_example,
    "companion": companion_example,
    "frozen": frozen_example,
    "jordan4": jordan_example,
    "nonneg": nonneg_example,
    "hamiltonian": hamiltonian_example,
    "complex4": complex_example,
    "degenerate": degenerate_example,
    "block": block_example,
    "jordan-chain": jordan_chain_example,
}


def names() -> List[str]:
    return list(CATALOG)


def build(name: str) -> RankOneSystem:
    try:
        return CATALOG[name]()
    except KeyError:
        raise InputError(f"Unknown example '{name}'; choose from {', '.join(CATALOG)}") from None


def random_system(rng: np.random.Generator, n: int, real: bool = False) -> RankOneSystem:
    """Gaussian A, u, v; complex unless ``real``."""

    def draw(*shape):
        x = rng.standard_normal(shape)
        return x if real else x + 1j * rng.standard_normal(shape)

    return RankOneSystem(A=draw(n, n), u=draw(n), v=draw(n), name=f"random-{n}")


def random_nonneg_irreducible(
    rng: np.random.Generator, n: int, density: float = 0.3
) -> np.ndarray:
    """Sparse nonnegative matrix made irreducible by a random Hamiltonian cycle."""
    A = rng.uniform(0.1, 1.0, (n, n)) * (rng.random((n, n)) < density)
    order = rng.permutation(n)
    for a, b in zip(order, np.roll(order, -1)):
        A[a, b] = max(A[a, b], rng.uniform(0.1, 1.0))
    return A


def random_hamiltonian(rng: np.random.Generator, half: int) -> RankOneSystem:
    """A = J^-1 S with S real symmetric and the standard J = [[0, I], [-I, 0]]."""
    n = 2 * half
    J = np.block([[np.zeros((half, half)), np.eye(half)], [-np.eye(half), np.zeros((half, half))]])
    S = rng.standard_normal((n, n))
    S = (S + S.T) / 2.0
    A = np.linalg.solve(J, S)
    ctx = StructureContext(kind=StructureKind.J_HAMILTONIAN, G=J)
    return make_structured_system(A, rng.standard_normal(n), ctx, name=f"hamiltonian-{n}")
