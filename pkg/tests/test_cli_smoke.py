import json
from pathlib import Path

from typer.testing import CliRunner

from specflow.cli import app

runner = CliRunner()
FIXTURES = Path(__file__).parent / "fixtures"


def test_help_succeeds() -> None:
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    assert "portrait" in result.output


def test_trace_help_lists_options() -> None:
    result = runner.invoke(app, ["trace", "--help"])
    assert result.exit_code == 0
    assert "tmax" in result.output.lower()


def test_portrait_writes_output(tmp_path: Path) -> None:
    result = runner.invoke(app, ["portrait", str(FIXTURES / "ray.json"), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "[portrait]" in result.output
    data = json.loads((tmp_path / "portrait.json").read_text(encoding="utf-8"))
    assert data["name"] == "ray"


def test_trace_and_levelset(tmp_path: Path) -> None:
    ray = str(FIXTURES / "ray.json")
    out = ["--out", str(tmp_path)]
    result = runner.invoke(
        app, ["trace", ray, "--theta", "0.37", "--tmin", "0.1", "--tmax", "10", *out]
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "trajectory.csv").exists()
    result = runner.invoke(
        app, ["levelset", ray, "--t", "2", "--window=-3,3,-3,3", "--res", "64", *out]
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "levelset.svg").exists()


def test_check_nonneg(tmp_path: Path) -> None:
    cycle = str(FIXTURES / "three_cycle.json")
    result = runner.invoke(app, ["check-nonneg", cycle, "--edge", "1,2", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    result = runner.invoke(app, ["check-nonneg", cycle, "--edge", "9,9", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "Error:" in result.output


def test_check_structured(tmp_path: Path) -> None:
    result = runner.invoke(
        app, ["check-structured", str(FIXTURES / "hamiltonian.json"), "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    data = json.loads((tmp_path / "structured.json").read_text(encoding="utf-8"))
    assert data["forecast"]["count"] == 4


def test_verify_ray_example(tmp_path: Path) -> None:
    result = runner.invoke(app, ["verify", str(FIXTURES / "ray.json"), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    data = json.loads((tmp_path / "verify.json").read_text(encoding="utf-8"))
    assert data["passed"] is True
    names = {s["name"] for s in data["suites"]}
    assert {"oracle_equivalence", "critical_points", "monodromy", "asymptotics"} <= names


def test_invalid_input_exits_with_one(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"A": [[1]], "u": [1]}), encoding="utf-8")
    result = runner.invoke(app, ["portrait", str(bad), "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "Error:" in result.output


def test_fixtures_command(tmp_path: Path) -> None:
    result = runner.invoke(app, ["fixtures", str(tmp_path)])
    assert result.exit_code == 0, result.output
    written = sorted(p.stem for p in tmp_path.glob("*.json"))
    assert "hamiltonian" in written and "jordan4" in written
