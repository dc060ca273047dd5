import pytest

from specflow import catalog
from specflow.perturbation import build_portrait
from specflow.verify import nonneg_applies, run_suites


def test_nonneg_example_runs_every_suite() -> None:
    portrait = build_portrait(catalog.nonneg_example())
    assert nonneg_applies(portrait)
    report = run_suites(portrait, seed=3)
    by_name = {s.name: s for s in report.suites}
    assert "nonneg" in by_name
    assert report.passed, [s for s in report.suites if not s.passed and not s.skipped]
    assert by_name["monodromy"].detail["kappa"] == 1


def test_degenerate_example_skips_flow_suites() -> None:
    report = run_suites(build_portrait(catalog.degenerate_example()))
    by_name = {s.name: s for s in report.suites}
    assert by_name["coverage"].skipped
    assert by_name["monodromy"].skipped
    assert report.passed


def test_structured_suite_applies_to_hamiltonian_systems() -> None:
    portrait = build_portrait(catalog.hamiltonian_example())
    assert not nonneg_applies(portrait)
    names = [s.name for s in run_suites(portrait).suites]
    assert "structured" in names


@pytest.mark.parametrize("name", catalog.names())
def test_every_catalog_example_verifies(name: str) -> None:
    report = run_suites(build_portrait(catalog.build(name)))
    assert report.passed, [s for s in report.suites if not s.passed and not s.skipped]
    oracle = next(s for s in report.suites if s.name == "oracle_equivalence")
    assert "lapack_max" in oracle.detail
