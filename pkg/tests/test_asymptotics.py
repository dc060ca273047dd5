import numpy as np
import pytest

from specflow import catalog
from specflow.asymptotics import (
    bounded_branches,
    detect_kappa,
    divergent_count,
    full_model,
    predicted_derivative,
    printed_c1,
    unbounded_branches,
    validate_asymptotics,
)
from specflow.errors import AsymptoticError
from specflow.linalg import eig_oracle, expand
from specflow.models import RankOneSystem
from specflow.perturbation import build_portrait
from specflow.poly import Poly


def test_jordan_example_kappa_and_coefficients() -> None:
    model = detect_kappa(catalog.jordan_example(4))
    assert model.kappa == 3
    assert model.branches == 4
    assert abs(model.lead - 1) < 1e-12
    assert abs(model.c_minus1 - 1) < 1e-12
    assert abs(model.c0) < 1e-12
    assert not model.degenerate


def test_degree_law() -> None:
    for system in (catalog.jordan_example(4), catalog.ray_example(), catalog.complex_example()):
        portrait = build_portrait(system)
        model = detect_kappa(portrait)
        assert portrait.puv.degree + model.kappa + 1 == portrait.l


def test_unbounded_branches_are_roots_of_tau() -> None:
    model = detect_kappa(catalog.jordan_example(4))
    pts = np.sort_complex(np.array(unbounded_branches(model, 1e4)))
    expected = np.sort_complex(np.array([10, 10j, -10, -10j]))
    np.testing.assert_allclose(pts, expected, atol=1e-9)
    with pytest.raises(AsymptoticError):
        unbounded_branches(model, 1.0)


def test_predicted_derivative() -> None:
    model = detect_kappa(catalog.jordan_example(4))
    # lambda = tau^(1/4) gives d lambda / d tau = 1 / (4 lambda^3).
    assert abs(predicted_derivative(model, 2.0) - 1 / 32) < 1e-12


def test_bounded_branch_of_ray_example() -> None:
    portrait = build_portrait(catalog.ray_example())
    branches = bounded_branches(portrait)
    assert len(branches) == 1
    b = branches[0]
    assert abs(b.zeta + 1) < 1e-8 and b.k == 1
    assert abs(b.beta - 1) < 1e-8
    assert abs(b.resolvent_coefficient + 1) < 1e-8
    assert b.sign_discrepancy


def test_validation_passes_on_ray_example() -> None:
    report = validate_asymptotics(catalog.ray_example(), threads=1)
    assert report.passed
    assert report.kappa == 0
    groups = {s.group for s in report.slopes}
    assert groups == {"unbounded", "bounded:0"}


def test_validation_on_jordan_example_is_exact() -> None:
    report = validate_asymptotics(catalog.jordan_example(4), order=2, threads=1)
    assert report.passed
    assert report.max_error < 1e-6


def test_degenerate_model() -> None:
    system = catalog.degenerate_example()
    model = full_model(system)
    assert model.degenerate
    with pytest.raises(AsymptoticError):
        unbounded_branches(model, 1e6)
    report = validate_asymptotics(system, model, threads=1)
    assert report.degenerate and report.passed


def test_printed_c1_undefined_for_kappa_one() -> None:
    model = detect_kappa(catalog.nonneg_example())
    assert model.kappa == 1
    assert printed_c1(model) is None


def test_divergent_count_matches_branches() -> None:
    assert divergent_count(catalog.jordan_example(4), 1e6, 3) == 4
    assert divergent_count(catalog.ray_example(), 1e6, 0) == 1


def _shared_root_system() -> RankOneSystem:
    # Q = lambda / ((lambda - 1)(lambda - 2)) and p_uv = lambda^2: one copy of 0 stays put,
    # the other eigenvalue approaches 0 like 2 / tau.
    return RankOneSystem(A=np.diag([0.0, 1.0, 2.0]), u=[1, 1, 1], v=[0, -1, 2], name="shared")


def test_root_shared_with_spectrum_splits_frozen_and_moving() -> None:
    portrait = build_portrait(_shared_root_system())
    assert portrait.puv.allclose(Poly([0, 0, 1]))
    frozen = portrait.accidental()
    assert len(frozen) == 1 and abs(frozen[0].value) < 1e-8
    assert frozen[0].multiplicity == 1

    branches = bounded_branches(portrait)
    assert [(b.frozen, b.k) for b in branches] == [(True, 1), (False, 1)]
    moving = branches[1]
    assert abs(moving.zeta) < 1e-8
    assert abs(moving.beta - 0.5) < 1e-8
    assert moving.resolvent_coefficient is None
    assert not moving.sign_discrepancy
    assert abs(moving.predict(100.0)[0] - 0.02) < 1e-10


def test_validation_with_shared_root_passes() -> None:
    report = validate_asymptotics(_shared_root_system(), threads=1)
    assert report.passed, report.slopes
    by_group = {s.group: s for s in report.slopes}
    assert set(by_group) == {"unbounded", "frozen", "bounded:1"}
    assert by_group["frozen"].exact


def test_bounded_branch_error_on_ray_example() -> None:
    branch = bounded_branches(build_portrait(catalog.ray_example()))[0]
    system = catalog.ray_example()
    for tau in (1e3, 3e3, 1e4, -1e3):
        observed = expand(eig_oracle(system.matrix_at(tau)))
        near = observed[np.argmin(np.abs(observed + 1))]
        assert abs(branch.predict(tau)[0] - near) <= 2 / tau**2


def test_nonneg_example_eigenvalues_and_error_slope() -> None:
    system = catalog.nonneg_example()
    for tau in (1.0, 10.0, 1e3):
        found = np.sort(expand(eig_oracle(system.matrix_at(tau))).real)
        root = np.sqrt(1 + tau)
        np.testing.assert_allclose(found, [1 - root, 1 + root], atol=1e-8)
    report = validate_asymptotics(system, tau_grid=[1e2, 1e4, 1e6], threads=1)
    assert report.passed
    unbounded = next(s for s in report.slopes if s.group == "unbounded")
    assert unbounded.slope == pytest.approx(-0.5, abs=0.05)


def test_hamiltonian_example_divergence_scale() -> None:
    system = catalog.hamiltonian_example()
    portrait = build_portrait(system)
    model = detect_kappa(portrait)
    np.testing.assert_allclose(model.moments[:4], [0, 0, 0, -4], atol=1e-12)
    assert portrait.puv.allclose(Poly([-4]))
    scale = (4 * 125000) ** 0.25
    for tau in (125000.0, -125000.0):
        moduli = np.abs(expand(eig_oracle(system.matrix_at(tau))))
        assert moduli.size == 4
        assert np.all((moduli >= 0.8 * scale) & (moduli <= 1.2 * scale))
