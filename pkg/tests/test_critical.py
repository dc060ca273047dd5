import math

import numpy as np
import pytest

from specflow import catalog
from specflow.critical import (
    definability,
    definable_perturbation,
    q0_poly,
    real_obstruction_witness,
)
from specflow.errors import InputError
from specflow.models import DefinabilityMode
from specflow.perturbation import build_portrait, multiplicity_at
from specflow.poly import Poly


def test_ray_example_critical_points() -> None:
    portrait = build_portrait(catalog.ray_example())
    assert q0_poly(portrait).allclose(Poly([0, -2, -1]))
    crit = portrait.critical
    assert len(crit) == 2
    assert abs(crit[0].z) < 1e-8 and abs(crit[0].t - 1.0) < 1e-8
    assert abs(crit[1].z + 2) < 1e-8 and abs(crit[1].tau + 3.0) < 1e-8
    assert all(c.kappa_local == 2 for c in crit)


def test_q0_of_frozen_example() -> None:
    portrait = build_portrait(catalog.frozen_example())
    assert q0_poly(portrait).allclose(-Poly.from_roots([1, 1, 2, 2]), tol=1e-8)


def test_companion_example_critical_points() -> None:
    portrait = build_portrait(catalog.companion_example())
    assert q0_poly(portrait).allclose(-Poly([0, 0, 3, -2, 1]), tol=1e-8)
    found = sorted(((c.z, c.t) for c in portrait.critical), key=lambda zt: zt[0].imag)
    expected = [
        (0j, 1.0),
        (complex(1, -math.sqrt(2)), 4 / math.sqrt(3)),
        (complex(1, math.sqrt(2)), 4 / math.sqrt(3)),
    ]
    assert len(found) == 3
    for (z, t), (z_exp, t_exp) in zip(found, expected):
        assert abs(z - z_exp) < 1e-8
        assert abs(t - t_exp) < 1e-8
    assert multiplicity_at(portrait, -1.0, 0.0) == 3


def test_critical_points_ignore_poles() -> None:
    # Q = 1/lambda^4: Q' vanishes nowhere outside the pole at 0.
    portrait = build_portrait(catalog.jordan_example(4))
    assert portrait.critical == []


def test_definability_of_real_critical_values() -> None:
    portrait = build_portrait(catalog.ray_example())
    real = definability(portrait, DefinabilityMode.REAL_RAY)
    assert not real.definable
    assert real.witness is not None and abs(real.witness.z) < 1e-8
    circle = definability(portrait, "unit_circle")
    assert not circle.definable


def test_definability_blocked_by_accidental_freezing() -> None:
    verdict = definability(build_portrait(catalog.frozen_example()), "real_ray")
    assert not verdict.definable
    assert verdict.frozen_witness is not None


def test_jordan_example_is_definable() -> None:
    portrait = build_portrait(catalog.jordan_example(4))
    for mode in DefinabilityMode:
        assert definability(portrait, mode).definable


def test_real_witness_persists_under_perturbation() -> None:
    witness = real_obstruction_witness(catalog.ray_example(), probe=True, seed=1)
    assert witness is not None
    assert abs(witness.x) < 1e-8
    assert abs(witness.tau0 - 1.0) < 1e-8
    assert witness.persists is True


def test_real_witness_needs_real_data() -> None:
    with pytest.raises(InputError):
        real_obstruction_witness(catalog.complex_example())


def test_definable_perturbation_rotates_v() -> None:
    system, verdict = definable_perturbation(catalog.ray_example(), "real_ray", seed=4)
    assert verdict.definable
    base = catalog.ray_example()
    ratio = system.v[0] / base.v[0]
    assert abs(abs(ratio) - 1.0) < 1e-12 and abs(ratio.imag) > 0
    np.testing.assert_allclose(system.A.data, base.A.data)
