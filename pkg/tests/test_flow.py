import math

import numpy as np
import pytest

from specflow import catalog
from specflow.critical import definable_perturbation
from specflow.errors import InputError
from specflow.flow import (
    branch_directions,
    coverage_probe,
    cycles,
    hausdorff,
    level_set,
    match,
    static_eigenvalues,
    sweep_circle,
    trace_ray,
    trajectory_residual,
)
from specflow.models import EventKind
from specflow.perturbation import build_portrait


def test_hausdorff_and_match() -> None:
    assert hausdorff([0], [1, 2]) == pytest.approx(2.0)
    assert hausdorff([1j, 2], [2, 1j]) == 0.0
    with pytest.raises(InputError):
        hausdorff([], [1])
    np.testing.assert_array_equal(match(np.array([0.0, 1.0]), np.array([1.1, 0.1])), [1, 0])


def test_cycles() -> None:
    assert cycles([1, 2, 0, 3]) == [[0, 1, 2], [3]]
    assert cycles([]) == []


def test_ray_trace_has_small_residual() -> None:
    portrait = build_portrait(catalog.ray_example())
    traj = trace_ray(portrait, 0.37, (0.1, 10.0), steps=100)
    assert traj.branch_count == 2
    assert traj.samples[0].param == pytest.approx(0.1)
    assert traj.samples[-1].param == pytest.approx(10.0)
    assert trajectory_residual(portrait, traj) <= 1e-8


def test_ray_through_collision_reports_event() -> None:
    portrait = build_portrait(catalog.ray_example())
    traj = trace_ray(portrait, 0.0, (0.5, 2.0), steps=200)
    collisions = [e for e in traj.events if e.kind is EventKind.COLLISION]
    assert len(collisions) == 1
    assert collisions[0].param == pytest.approx(1.0)
    assert abs(collisions[0].z) < 1e-6
    assert trajectory_residual(portrait, traj) <= 1e-8
    # Past tau = 1 both eigenvalues are real.
    assert all(abs(z.imag) < 1e-8 for z in traj.samples[-1].positions)


def test_ray_needs_positive_range() -> None:
    with pytest.raises(InputError):
        trace_ray(catalog.ray_example(), 0.0, (0.0, 1.0))
    with pytest.raises(InputError):
        trace_ray(catalog.ray_example(), 0.0, (2.0, 1.0))


def test_frozen_values_are_static() -> None:
    traj = trace_ray(catalog.frozen_example(), 0.3, (0.1, 5.0), steps=50)
    assert traj.branch_count == 1
    assert sorted(round(z.real, 6) for z, _ in traj.static) == [1.0, 2.0]
    assert abs(traj.samples[-1].positions[0] - (1 + 5 * np.exp(0.3j))) < 1e-8


def test_degenerate_system_has_no_moving_branch() -> None:
    portrait = build_portrait(catalog.degenerate_example())
    assert static_eigenvalues(portrait)[0][1] == 1
    traj = sweep_circle(portrait, 2.0)
    assert traj.branch_count == 0
    assert traj.monodromy == []


def test_jordan_monodromy_is_one_cycle() -> None:
    traj = sweep_circle(catalog.jordan_example(4), 1.0)
    assert traj.monodromy is not None
    parts = cycles(traj.monodromy)
    assert len(parts) == 1 and len(parts[0]) == 4


def test_monodromy_outside_critical_radii_is_trivial_for_one_divergent_branch() -> None:
    traj = sweep_circle(catalog.ray_example(), 10.0)
    assert traj.monodromy == [0, 1]
    assert traj.singular == []


def test_circle_through_critical_point_lists_it() -> None:
    traj = sweep_circle(catalog.ray_example(), 1.0)
    assert len(traj.singular) == 1
    assert abs(traj.singular[0].z) < 1e-8


def test_level_set_points_lie_on_the_curve() -> None:
    portrait = build_portrait(catalog.ray_example())
    level = level_set(portrait, 2.0, resolution=128)
    pts = level.points()
    assert pts.size > 0
    values = np.abs(portrait.q(pts)) * 2.0
    assert float(np.max(np.abs(values - 1.0))) < 1e-6


def test_level_set_rejects_bad_arguments() -> None:
    portrait = build_portrait(catalog.ray_example())
    with pytest.raises(InputError):
        level_set(portrait, 0.0)
    with pytest.raises(InputError):
        level_set(portrait, 1.0, window=(1.0, 0.0, -1.0, 1.0))


def test_coverage_categories() -> None:
    portrait = build_portrait(catalog.ray_example())
    assert coverage_probe(portrait, complex(-0.5, math.sqrt(3) / 2)).category == "in_sigma_A"
    assert coverage_probe(portrait, -1.0 + 0j).category == "in_Qzero"
    result = coverage_probe(portrait, 0.7 + 0.4j)
    assert result.category == "on_level"
    assert result.located
    assert result.t == pytest.approx(1.0 / abs(portrait.q(0.7 + 0.4j)))


def test_saddle_has_four_directions() -> None:
    portrait = build_portrait(catalog.ray_example())
    angles = branch_directions(portrait, 0j, 1.0)
    assert len(angles) == 4
    gaps = np.diff(angles + [angles[0] + 2 * math.pi])
    np.testing.assert_allclose(gaps, math.pi / 2, atol=1e-2)


def test_rotated_ray_example_keeps_branches_apart() -> None:
    system, verdict = definable_perturbation(catalog.ray_example(), "real_ray", seed=7)
    assert verdict.definable
    for theta in (0.0, math.pi):
        traj = trace_ray(system, theta, (0.1, 10.0), steps=400)
        assert not [e for e in traj.events if e.kind is EventKind.COLLISION]
        gaps = [abs(s.positions[0] - s.positions[1]) for s in traj.samples]
        assert min(gaps) > 1e-4
