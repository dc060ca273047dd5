import numpy as np
import pytest

from specflow import catalog
from specflow.errors import InputError, StructureError
from specflow.models import Axes, StructureContext, StructureKind
from specflow.structured import (
    _axes,
    hamiltonian_forecast,
    make_structured_system,
    verify_symmetry,
)


def test_hamiltonian_example_forecast() -> None:
    forecast = hamiltonian_forecast(catalog.hamiltonian_example())
    assert forecast.count == 4
    assert forecast.kappa == 3
    assert forecast.sign == -1
    assert forecast.plus_infinity is Axes.OFF_AXIS
    assert forecast.minus_infinity is Axes.MIXED


def test_axes_rule() -> None:
    assert _axes(2, 1) is Axes.REAL_PAIR
    assert _axes(2, -1) is Axes.IMAGINARY_PAIR
    assert _axes(4, 1) is Axes.MIXED
    assert _axes(4, -1) is Axes.OFF_AXIS


def test_forecast_needs_hamiltonian_structure() -> None:
    with pytest.raises(InputError):
        hamiltonian_forecast(catalog.ray_example())


def test_symmetry_of_hamiltonian_spectrum() -> None:
    report = verify_symmetry(catalog.hamiltonian_example(), [-10.0, -1.0, 0.5, 3.0, 10.0])
    assert report.passed
    assert all(s.negation_error is not None for s in report.samples)


def test_random_hamiltonian_keeps_structure() -> None:
    system = catalog.random_hamiltonian(np.random.default_rng(5), 3)
    assert system.structure is not None
    assert system.structure.residual(system.A) < 1e-10 * (1 + system.A.norm())
    B = system.matrix_at(2.5)
    assert system.structure.residual(B) < 1e-9 * (1 + B.norm())
    assert verify_symmetry(system, [2.5, -0.7]).passed


def test_derived_v_for_selfadjoint_structure() -> None:
    H = np.diag([1.0, -1.0])
    ctx = StructureContext(kind=StructureKind.H_SELFADJOINT, G=H)
    A = np.array([[2.0, 1.0], [-1.0, 3.0]])  # HA is Hermitian
    system = make_structured_system(A, [1.0, 2.0], ctx)
    np.testing.assert_allclose(system.v, [1.0, -2.0])
    update = np.outer(system.u, system.v.conj())
    np.testing.assert_allclose(update, np.outer(system.u, system.u) @ H)


def test_structure_violation_is_reported() -> None:
    ctx = StructureContext(kind=StructureKind.J_HAMILTONIAN, G=catalog.HAMILTONIAN_J)
    with pytest.raises(StructureError):
        make_structured_system(np.eye(4), [1, 0, 0, 0], ctx)


def test_singular_form_is_rejected() -> None:
    with pytest.raises(ValueError):
        StructureContext(kind=StructureKind.H_SELFADJOINT, G=np.diag([1.0, 0.0]))
