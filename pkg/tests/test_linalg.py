import numpy as np
import pytest

from specflow.errors import InputError, OracleSizeError
from specflow.linalg import (
    CMatrix,
    char_poly,
    eig_oracle,
    eigen_multiplicities,
    expand,
    minimal_poly,
    moments,
    poly_at_matrix,
)
from specflow.poly import Poly


def test_char_poly_of_small_matrix() -> None:
    A = CMatrix([[0, 1], [-1, -1]])
    assert char_poly(A).allclose(Poly([1, 1, 1]))


def test_minimal_poly_drops_repeated_factors() -> None:
    assert minimal_poly(CMatrix.identity(3)).allclose(Poly([-1, 1]))
    assert minimal_poly(CMatrix(np.diag([1.0, 1.0, 2.0]))).allclose(Poly([2, -3, 1]))


def test_minimal_poly_of_jordan_block_is_full_degree() -> None:
    mA = minimal_poly(CMatrix.jordan_block(3))
    assert mA.allclose(Poly([0, 0, 0, 1]))


def test_minimal_poly_annihilates_random_matrix() -> None:
    rng = np.random.default_rng(7)
    A = CMatrix(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    mA = minimal_poly(A)
    assert mA.degree == 5
    residual = np.linalg.norm(poly_at_matrix(mA, A))
    assert residual <= 1e-8 * max(1.0, A.norm()) ** 5


def test_moments() -> None:
    A = CMatrix([[0, 1], [-1, -1]])
    np.testing.assert_allclose(moments(A, [0, 1], [1, 1], 2), [1, 0, -1])
    with pytest.raises(InputError):
        moments(A, [0, 1], [1, 1], -1)


def test_eigen_multiplicities() -> None:
    A = CMatrix(np.diag([1.0, 1.0, 2.0]))
    info = eigen_multiplicities(A, minimal_poly(A))
    assert [(round(v.real, 6), a, m) for v, a, m in info] == [(1.0, 2, 1), (2.0, 1, 1)]


def test_oracle_size_limit() -> None:
    with pytest.raises(OracleSizeError):
        eig_oracle(CMatrix.identity(3), nmax=2)


def test_oracle_methods_agree() -> None:
    A = CMatrix([[2, 1, 0], [0, 3, 0], [1, 0, -1]])
    lapack = expand(eig_oracle(A))
    charpoly = expand(eig_oracle(A, method="charpoly"))
    np.testing.assert_allclose(np.sort_complex(lapack), np.sort_complex(charpoly), atol=1e-8)


def test_expand_repeats_values() -> None:
    np.testing.assert_array_equal(expand([(1, 2), (3, 1)]), [1, 1, 3])


def test_cmatrix_rejects_non_square() -> None:
    with pytest.raises(InputError):
        CMatrix([[1, 2, 3], [4, 5, 6]])


def test_char_poly_satisfies_cayley_hamilton() -> None:
    rng = np.random.default_rng(13)
    for n in range(2, 9):
        entries = np.sqrt(rng.random((n, n))) * np.exp(2j * np.pi * rng.random((n, n)))
        A = CMatrix(entries)
        residual = np.linalg.norm(poly_at_matrix(char_poly(A), A), 2)
        assert residual <= 1e-8 * A.norm() ** n
