import csv
import json
from pathlib import Path

import numpy as np
import pytest

from specflow import catalog, pipeline
from specflow.config import Settings
from specflow.errors import InputError
from specflow.models import StructureKind

FIXTURES = Path(__file__).parent / "fixtures"


def test_parse_system_reads_real_and_complex_entries() -> None:
    ray = pipeline.parse_system(FIXTURES / "ray.json")
    assert ray.name == "ray" and ray.n == 2
    system = pipeline.parse_system(FIXTURES / "complex2.json")
    assert system.name == "complex2"
    assert system.A.data[0, 1] == 1j
    assert system.u[0] == 1 + 1j
    assert system.v[1] == -1j


def test_parse_structured_system_derives_v() -> None:
    system = pipeline.parse_system(FIXTURES / "hamiltonian.json")
    assert system.structure is not None
    assert system.structure.kind is StructureKind.J_HAMILTONIAN
    np.testing.assert_allclose(system.v, [-1, 1, -1, 0])


@pytest.mark.parametrize(
    "payload",
    [
        {"A": [[1, 0], [0, 1]], "u": [1, 0]},
        {"A": [[1, 0], [0, 1]], "u": [1, 0], "v": [1, 0, 0]},
        {"A": [[1, 0], [0, 1]], "u": [1, 0], "v": [0, 1], "structure": {"kind": "H", "G": []}},
        {"A": [[1, 0], [0, 1]], "u": [0, 0], "v": [0, 1]},
    ],
)
def test_invalid_documents_raise_input_error(payload, tmp_path: Path) -> None:
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(InputError):
        pipeline.parse_system(path)


def test_malformed_or_missing_file(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError):
        pipeline.parse_system(path)
    with pytest.raises(InputError):
        pipeline.parse_system(tmp_path / "absent.json")


def test_dump_and_reload_keeps_the_system(tmp_path: Path) -> None:
    original = catalog.complex_example()
    path = pipeline.dump_system(original, tmp_path / "c.json")
    reloaded = pipeline.parse_system(path)
    np.testing.assert_allclose(reloaded.A.data, original.A.data)
    np.testing.assert_allclose(reloaded.u, original.u)
    np.testing.assert_allclose(reloaded.v, original.v)
    assert reloaded.name == "complex4"


def test_dump_round_trip_is_exact(tmp_path: Path) -> None:
    rng = np.random.default_rng(4)
    for system in (catalog.random_system(rng, 4), catalog.random_system(rng, 3, real=True)):
        reloaded = pipeline.parse_system(pipeline.dump_system(system, tmp_path / "s.json"))
        np.testing.assert_array_equal(reloaded.A.data, system.A.data)
        np.testing.assert_array_equal(reloaded.u, system.u)
        np.testing.assert_array_equal(reloaded.v, system.v)


def test_output_dir_defaults_to_slug(tmp_path: Path) -> None:
    settings = Settings(data_dir=tmp_path)
    assert pipeline.output_dir(Path("My System.json"), settings) == tmp_path / "my-system"
    assert pipeline.output_dir(Path("x.json"), settings, tmp_path / "o") == tmp_path / "o"


def test_run_portrait_writes_json(tmp_path: Path) -> None:
    path = pipeline.run_portrait(catalog.ray_example(), tmp_path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["l"] == 2
    assert len(data["critical"]) == 2
    assert data["definability"]["real_ray"]["definable"] is False
    assert data["real_witness"]["tau0"] == pytest.approx(1.0)


def test_run_trace_marks_static_rows(tmp_path: Path) -> None:
    csv_path, svg_path = pipeline.run_trace(catalog.frozen_example(), 0.3, 0.1, 2.0, 40, tmp_path)
    with csv_path.open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == pipeline.CSV_HEADER
    assert sum(1 for r in rows[1:] if r[4] == "frozen") == 4
    assert svg_path.read_text(encoding="utf-8").startswith("<svg")


def test_run_circle_reports_cycles(tmp_path: Path) -> None:
    _, _, json_path = pipeline.run_circle(catalog.jordan_example(4), 1.0, 200, tmp_path)
    data = json.loads(json_path.read_text(encoding="utf-8"))
    assert len(data["cycles"]) == 1
    assert sorted(data["monodromy"]) == [0, 1, 2, 3]


def test_run_levelset_with_window(tmp_path: Path) -> None:
    csv_path, _ = pipeline.run_levelset(
        catalog.ray_example(), 2.0, (-3.0, 3.0, -3.0, 3.0), 64, tmp_path
    )
    with csv_path.open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert len(rows) > 1
    assert {r[4] for r in rows[1:]} <= {"open", "closed"}


def test_run_checks(tmp_path: Path) -> None:
    path, passed = pipeline.run_nonneg(catalog.nonneg_example(), 0, 1, tmp_path)
    assert passed
    assert json.loads(path.read_text(encoding="utf-8"))["edge"] == [1, 2]
    path, passed = pipeline.run_structured(catalog.hamiltonian_example(), [-1.0, 3.0], tmp_path)
    assert passed
    assert json.loads(path.read_text(encoding="utf-8"))["forecast"]["count"] == 4
    path, passed = pipeline.run_asymptotics(catalog.jordan_example(4), None, tmp_path)
    assert passed
    assert json.loads(path.read_text(encoding="utf-8"))["model"]["kappa"] == 3


def test_argument_parsers() -> None:
    assert pipeline.parse_floats("1, 2.5,-3", expected=3) == [1.0, 2.5, -3.0]
    assert pipeline.parse_complex_list("1e3, 2+1j") == [1000, 2 + 1j]
    assert pipeline.parse_edge("1,2", 2) == (0, 1)
    with pytest.raises(InputError):
        pipeline.parse_floats("1,2", expected=4)
    with pytest.raises(InputError):
        pipeline.parse_edge("3,1", 2)
    with pytest.raises(InputError):
        pipeline.parse_edge("a", 2)


def test_catalog_names_and_lookup() -> None:
    assert "hamiltonian" in catalog.names()
    for name in catalog.names():
        assert catalog.build(name).name is not None
    with pytest.raises(InputError):
        catalog.build("nope")
