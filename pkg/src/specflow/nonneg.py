"""
Divergent eigenvalue counts for entry perturbations A + tau e_i0 e_j0^T of a nonnegative
irreducible matrix, read off the directed graph of A (edge i -> j when a_ij > 0).
"""

import logging
import math
from functools import reduce

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .asymptotics import detect_kappa
from .config import get_settings
from .errors import InputError, OracleSizeError
from .linalg import CMatrix, eig_oracle, expand
from .models import NonnegReport, RankOneSystem

logger = logging.getLogger(__name__)

EDGE_TOL = 1e-12
EMPIRICAL_TAU = 1e8


def _adjacency(A: CMatrix | np.ndarray) -> np.ndarray:
    data = A.data if isinstance(A, CMatrix) else np.asarray(A)
    if np.any(np.abs(np.imag(data)) > 0):
        raise InputError("Nonnegative analysis needs a real matrix")
    real = np.real(data).astype(float)
    if real.ndim != 2 or real.shape[0] != real.shape[1]:
        raise InputError(f"Expected a square matrix, got shape {real.shape}")
    if np.any(real < 0):
        raise InputError("Matrix has negative entries")
    top = float(real.max()) if real.size else 0.0
    return real > EDGE_TOL * top if top > 0 else np.zeros_like(real, dtype=bool)


def _check_index(n: int, i: int, name: str) -> None:
    if not 0 <= i < n:
        raise InputError(f"{name}={i} out of range for n={n}")


def is_irreducible(A: CMatrix | np.ndarray) -> bool:
    """Strong connectivity of the graph of A."""
    adj = _adjacency(A)
    count, _ = connected_components(csr_matrix(adj), directed=True, connection="strong")
    return count == 1


def _path_length(adj: np.ndarray, source: int, target: int) -> float:
    dist = shortest_path(csr_matrix(adj), directed=True, unweighted=True, indices=source)
    return float(dist[target])


def _first_positive_power(adj: np.ndarray, row: int, col: int) -> int | None:
    """First k >= 0 with (A^k)[row, col] > 0, from boolean powers."""
    n = adj.shape[0]
    reach = np.eye(n, dtype=bool)
    for k in range(n):
        if reach[row, col]:
            return k
        reach = (reach.astype(int) @ adj.astype(int)) > 0
    return None


def shortest_cycle_through_edge(A: CMatrix | np.ndarray, i0: int, j0: int) -> int:
    """
    Length of the shortest cycle through the edge i0 -> j0 in the graph of
    A + e_i0 e_j0^T: one plus the shortest path from j0 back to i0.
    """
    adj = _adjacency(A)
    n = adj.shape[0]
    _check_index(n, i0, "i0")
    _check_index(n, j0, "j0")
    if i0 == j0:
        return 1
    d = _path_length(adj, j0, i0)
    if math.isinf(d):
        raise InputError(f"No path from {j0} to {i0}; the edge lies on no cycle")
    power = _first_positive_power(adj, j0, i0)
    if power != int(d):
        raise InputError(f"Path length {int(d)} disagrees with first positive power {power}")
    return int(d) + 1


def imprimitivity_index(A: CMatrix | np.ndarray) -> int:
    """Gcd of the cycle lengths, from breadth-first levels: gcd of level[i] + 1 - level[j]."""
    adj = _adjacency(A)
    if not is_irreducible(adj):
        raise InputError("Imprimitivity index is defined for irreducible matrices")
    level = shortest_path(csr_matrix(adj), directed=True, unweighted=True, indices=0)
    rows, cols = np.nonzero(adj)
    diffs = (level[rows] + 1 - level[cols]).astype(int)
    return int(reduce(math.gcd, np.abs(diffs).tolist(), 0))


def edge_system(A: CMatrix | np.ndarray, i0: int, j0: int) -> RankOneSystem:
    """(A, e_i0, e_j0): B(tau) = A + tau e_i0 e_j0^T."""
    mat = A if isinstance(A, CMatrix) else CMatrix(A)
    _check_index(mat.n, i0, "i0")
    _check_index(mat.n, j0, "j0")
    u = np.zeros(mat.n)
    v = np.zeros(mat.n)
    u[i0] = 1.0
    v[j0] = 1.0
    return RankOneSystem(A=mat, u=u, v=v, name=f"edge-{i0}-{j0}")


def empirical_divergent_count(
    A: CMatrix | np.ndarray, i0: int, j0: int, l: int, tau: float = EMPIRICAL_TAU
) -> int:
    """Oracle eigenvalues of A + tau e_i0 e_j0^T with modulus above tau^(1/(l+1))."""
    system = edge_system(A, i0, j0)
    pts = expand(eig_oracle(system.matrix_at(tau), nmax=get_settings().oracle_nmax))
    return int(np.sum(np.abs(pts) > tau ** (1.0 / (l + 1))))


def divergence_count(
    A: CMatrix | np.ndarray, i0: int, j0: int, empirical: bool = True
) -> NonnegReport:
    """
    Number l of eigenvalues going to infinity as tau -> +inf. ``check`` holds when l is a
    multiple of the imprimitivity index and the moment test gives kappa = l - 1.
    """
    if not is_irreducible(A):
        raise InputError("Matrix is reducible")
    l = shortest_cycle_through_edge(A, i0, j0)
    index = imprimitivity_index(A)
    model = detect_kappa(edge_system(A, i0, j0))
    check = l % index == 0 and not model.degenerate and model.kappa == l - 1
    if not check:
        logger.warning("Edge (%d, %d): l=%d index=%d kappa=%d", i0, j0, l, index, model.kappa)
    count = None
    if empirical:
        try:
            count = empirical_divergent_count(A, i0, j0, l)
        except OracleSizeError as exc:
            logger.warning("Skipping empirical count: %s", exc)
    return NonnegReport(l=l, index=index, kappa=model.kappa, check=check, empirical_count=count)
