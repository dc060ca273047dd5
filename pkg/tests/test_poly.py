import numpy as np
import pytest

from specflow.errors import InputError
from specflow.flow import hausdorff
from specflow.linalg import expand
from specflow.poly import (
    Poly,
    cluster_points,
    common_roots,
    derivative,
    multiplicity_of,
    raw_roots,
    roots,
)


def test_trailing_zeros_are_trimmed() -> None:
    p = Poly([1, 2, 0, 0])
    assert p.degree == 1
    assert Poly([0, 0]).is_zero
    assert Poly().degree == -1


def test_arithmetic_and_evaluation() -> None:
    p = Poly([1, 1])  # 1 + x
    q = Poly([-1, 1])  # -1 + x
    assert (p * q).allclose(Poly([-1, 0, 1]))
    assert (p - q).allclose(Poly([2]))
    quo, rem = divmod(Poly([-1, 0, 1]), q)
    assert quo.allclose(p)
    assert rem.is_zero
    values = p(np.array([0.0, 1.0, 2j]))
    np.testing.assert_allclose(values, [1.0, 2.0, 1 + 2j])


def test_derivative() -> None:
    assert derivative(Poly([0, 0, 0, 1])).allclose(Poly([0, 0, 3]))
    assert derivative(Poly([5])).is_zero
    with pytest.raises(InputError):
        derivative(Poly([1, 1]), order=0)


def test_roots_report_multiplicities() -> None:
    p = Poly.from_roots([1, 1, -2])
    found = roots(p)
    assert [m for _, m in found] == [1, 2]
    assert abs(found[0][0] + 2) < 1e-8
    assert abs(found[1][0] - 1) < 1e-6
    assert sum(m for _, m in found) == p.degree


def test_raw_roots_deflates_zero_roots() -> None:
    p = Poly([0, 0, -1, 1])  # x^2 (x - 1)
    found = np.sort_complex(raw_roots(p))
    np.testing.assert_allclose(found, [0, 0, 1], atol=1e-12)


def test_raw_roots_needs_positive_degree() -> None:
    with pytest.raises(InputError):
        raw_roots(Poly([3]))


def test_cluster_points_merges_close_values() -> None:
    groups = cluster_points([1.0, 1.0 + 1e-9, 3.0])
    assert sorted(m for _, m in groups) == [1, 2]


def test_common_roots_and_multiplicity() -> None:
    p = Poly.from_roots([1, 1, 2])
    q = Poly.from_roots([1, 3])
    shared = common_roots(p, q, tol=1e-6)
    assert len(shared) == 1 and abs(shared[0] - 1) < 1e-6
    assert multiplicity_of(p, 1.0, tol=1e-5) == 2
    assert multiplicity_of(p, 5.0, tol=1e-5) == 0


def test_nonfinite_coefficients_rejected() -> None:
    with pytest.raises(InputError):
        Poly([1, float("nan")])


def _separated_points(rng: np.random.Generator, count: int, spacing: float) -> np.ndarray:
    pts: list[complex] = []
    while len(pts) < count:
        z = complex(*rng.uniform(-1.0, 1.0, 2))
        if abs(z) <= 1.0 and all(abs(z - w) >= spacing for w in pts):
            pts.append(z)
    return np.array(pts)


@pytest.mark.parametrize("degree", [3, 7, 12])
def test_roots_recover_random_simple_roots(degree: int) -> None:
    known = _separated_points(np.random.default_rng(degree), degree, 0.3)
    found = roots(Poly.from_roots(known))
    assert [m for _, m in found] == [1] * degree
    assert hausdorff([r for r, _ in found], known) <= 1e-8


def test_roots_recover_random_roots_with_multiplicity() -> None:
    a, b, c = _separated_points(np.random.default_rng(9), 3, 0.3)
    found = roots(Poly.from_roots([a, a, b, c, c]))
    assert sum(m for _, m in found) == 5
    for value, mult in ((a, 2), (b, 1), (c, 2)):
        assert any(abs(r - value) <= 1e-6 and m == mult for r, m in found)


def test_derivative_matches_centered_differences() -> None:
    rng = np.random.default_rng(10)
    p = Poly(rng.standard_normal(7) + 1j * rng.standard_normal(7))
    dp = derivative(p)
    h = 1e-6
    for z in 2 * np.sqrt(rng.random(20)) * np.exp(2j * np.pi * rng.random(20)):
        fd = (p(z + h) - p(z - h)) / (2 * h)
        exact = dp(z)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_roots_of_product_are_union_of_factor_roots() -> None:
    rng = np.random.default_rng(12)
    for _ in range(5):
        deg_p, deg_q = (int(d) for d in rng.integers(1, 6, 2))
        known = 2 * _separated_points(rng, deg_p + deg_q, 0.1)
        p = Poly.from_roots(known[:deg_p])
        q = Poly.from_roots(known[deg_p:])
        union = np.concatenate([expand(roots(p)), expand(roots(q))])
        joint = expand(roots(p * q))
        assert joint.size == union.size == deg_p + deg_q
        assert hausdorff(joint, union) <= 1e-6
