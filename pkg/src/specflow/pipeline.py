import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from .asymptotics import full_model, validate_asymptotics
from .config import Settings
from .critical import definability, real_obstruction_witness
from .errors import InputError, OracleSizeError, SpecflowError
from .flow import cycles, level_set, sweep_circle, trace_ray
from .models import (
    DefinabilityMode,
    LevelSet,
    RankOneSystem,
    StructureContext,
    StructureKind,
    SystemDocument,
    Trajectory,
)
from .nonneg import divergence_count
from .perturbation import SystemLike, portrait_of
from .plotting import level_set_svg, trajectory_svg
from .structured import hamiltonian_forecast, verify_symmetry
from .utils import read_text, slugify_path, write_csv, write_json, write_text_atomic

logger = logging.getLogger(__name__)

CSV_HEADER = ("parameter", "branch_id", "re", "im", "event_flag")
STRUCTURE_CODES = {"H": StructureKind.H_SELFADJOINT, "J": StructureKind.J_HAMILTONIAN}


def _entry(value) -> complex:
    if isinstance(value, (tuple, list)):
        return complex(value[0], value[1])
    return complex(value)


def _array(rows) -> np.ndarray:
    return np.array([[_entry(x) for x in row] for row in rows], dtype=complex)


def _vector(values) -> np.ndarray:
    return np.array([_entry(x) for x in values], dtype=complex)


def system_from_dict(payload: Dict) -> RankOneSystem:
    """Build a system from a decoded input document."""
    from .structured import make_structured_system

    try:
        doc = SystemDocument.model_validate(payload)
        A = _array(doc.A)
        u = _vector(doc.u)
        if doc.structure is None:
            return RankOneSystem(A=A, u=u, v=_vector(doc.v or []), name=doc.name)
        ctx = StructureContext(
            kind=STRUCTURE_CODES[doc.structure.kind], G=_array(doc.structure.G)
        )
        return make_structured_system(A, u, ctx, name=doc.name)
    except ValidationError as exc:
        raise InputError(f"Invalid system: {exc.errors()[0]['msg']}") from exc


def parse_system(path: Path) -> RankOneSystem:
    """Read a system JSON file."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"No such file: {path}")
    try:
        payload = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"Malformed JSON in {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise InputError(f"{path}: expected a JSON object")
    sys = system_from_dict(payload)
    if sys.name is None:
        sys = sys.model_copy(update={"name": path.stem})
    return sys


def _encode(value: complex):
    value = complex(value)
    return value.real if value.imag == 0 else [value.real, value.imag]


def system_to_dict(sys: RankOneSystem) -> Dict:
    """Inverse of ``system_from_dict``; real entries stay plain numbers."""
    payload: Dict = {"A": [[_encode(x) for x in row] for row in sys.A.data]}
    payload["u"] = [_encode(x) for x in sys.u]
    if sys.structure is None:
        payload["v"] = [_encode(x) for x in sys.v]
    else:
        code = "H" if sys.structure.kind is StructureKind.H_SELFADJOINT else "J"
        payload["structure"] = {
            "kind": code,
            "G": [[_encode(x) for x in row] for row in sys.structure.G.data],
        }
    if sys.name:
        payload["name"] = sys.name
    return payload


def dump_system(sys: RankOneSystem, path: Path) -> Path:
    write_json(path, system_to_dict(sys))
    return path


def output_dir(source: Path, settings: Settings, out: Optional[Path] = None) -> Path:
    """``out`` if given, else <data_dir>/<slug of the input file>."""
    return Path(out) if out is not None else settings.data_dir / slugify_path(source)


def _trajectory_rows(traj: Trajectory) -> List[Tuple]:
    flags: Dict[float, str] = {}
    for event in traj.events:
        # An event is attached to the first sample at or after its parameter.
        params = traj.params()
        idx = int(np.searchsorted(params, event.param - 1e-12))
        if idx < params.size:
            key = float(params[idx])
            flags[key] = ";".join(filter(None, [flags.get(key, ""), event.kind.value]))
    rows: List[Tuple] = []
    for s in traj.samples:
        flag = flags.get(float(s.param), "")
        for b, z in enumerate(s.positions):
            rows.append((float(s.param), b, float(z.real), float(z.imag), flag))
    start = traj.branch_count
    for k, (value, _) in enumerate(traj.static):
        for s in (traj.samples[0], traj.samples[-1]):
            rows.append((float(s.param), start + k, value.real, value.imag, "frozen"))
    return rows


def _level_rows(level: LevelSet) -> List[Tuple]:
    rows: List[Tuple] = []
    for k, line in enumerate(level.polylines):
        flag = "closed" if line.closed else "open"
        for z in line.points:
            rows.append((level.t, k, float(z.real), float(z.imag), flag))
    for cp in level.singular_points:
        rows.append((level.t, "singular", cp.z.real, cp.z.imag, "critical"))
    return rows


def run_portrait(sys: SystemLike, out_dir: Path) -> Path:
    """portrait.json: m_A, p_uv, q0, frozen eigenvalues, critical points and definability."""
    portrait = portrait_of(sys)
    payload: Dict = {
        "name": portrait.system.name,
        "n": portrait.system.n,
        "l": portrait.l,
        "mA": portrait.mA,
        "puv": portrait.puv,
        "q0": portrait.q0,
        "cancelled": portrait.q.cancelled,
        "frozen": portrait.frozen,
        "critical": portrait.critical,
        "definability": {
            mode.value: definability(portrait, mode) for mode in DefinabilityMode
        },
    }
    system = portrait.system
    if system.is_real or system.structure is not None:
        try:
            payload["real_witness"] = real_obstruction_witness(portrait)
        except InputError as exc:
            logger.info("No real witness search: %s", exc)
    path = out_dir / "portrait.json"
    write_json(path, payload)
    logger.info(
        "Portrait: %d frozen, %d critical. Saved to %s",
        len(portrait.frozen),
        len(portrait.critical),
        path,
    )
    return path


def run_trace(
    sys: SystemLike, theta: float, tmin: float, tmax: float, steps: int, out_dir: Path
) -> Tuple[Path, Path]:
    portrait = portrait_of(sys)
    traj = trace_ray(portrait, theta, (tmin, tmax), steps=steps)
    csv_path = out_dir / "trajectory.csv"
    svg_path = out_dir / "trace.svg"
    write_csv(csv_path, CSV_HEADER, _trajectory_rows(traj))
    write_text_atomic(svg_path, trajectory_svg(traj))
    logger.info(
        "Traced %d branches over %d samples, %d events. Saved to %s",
        traj.branch_count,
        len(traj.samples),
        len(traj.events),
        csv_path,
    )
    return csv_path, svg_path


def run_circle(sys: SystemLike, t: float, steps: int, out_dir: Path) -> Tuple[Path, Path, Path]:
    portrait = portrait_of(sys)
    traj = sweep_circle(portrait, t, steps=steps)
    csv_path = out_dir / "sweep.csv"
    svg_path = out_dir / "circle.svg"
    json_path = out_dir / "sweep.json"
    write_csv(csv_path, CSV_HEADER, _trajectory_rows(traj))
    write_text_atomic(svg_path, trajectory_svg(traj))
    perm = traj.monodromy or []
    write_json(
        json_path,
        {
            "t": t,
            "monodromy": perm,
            "cycles": cycles(perm),
            "singular": traj.singular,
            "events": traj.events,
            "static": traj.static,
        },
    )
    logger.info("Circle t=%g: monodromy cycles %s. Saved to %s", t, cycles(perm), json_path)
    return csv_path, svg_path, json_path


def run_levelset(
    sys: SystemLike,
    t: float,
    window: Optional[Tuple[float, float, float, float]],
    resolution: int,
    out_dir: Path,
) -> Tuple[Path, Path]:
    portrait = portrait_of(sys)
    level = level_set(portrait, t, window=window, resolution=resolution)
    csv_path = out_dir / "levelset.csv"
    svg_path = out_dir / "levelset.svg"
    write_csv(csv_path, CSV_HEADER, _level_rows(level))
    write_text_atomic(svg_path, level_set_svg(level, portrait.sigma_a()))
    if not level.polylines:
        logger.warning("No level curve at t=%g inside window %s", t, level.window)
    logger.info("Level set t=%g: %d polylines. Saved to %s", t, len(level.polylines), csv_path)
    return csv_path, svg_path


def run_asymptotics(
    sys: SystemLike, tau_grid: Optional[Sequence[complex]], out_dir: Path
) -> Tuple[Path, bool]:
    """asym.json with the model and first- and second-order validation."""
    portrait = portrait_of(sys)
    model = full_model(portrait)
    payload: Dict = {"model": model, "tau_min": model.tau_min}
    passed = True
    try:
        reports = {
            f"order{order}": validate_asymptotics(portrait, model, tau_grid, order=order)
            for order in (1, 2)
        }
        payload.update(reports)
        passed = reports["order1"].passed
    except OracleSizeError as exc:
        logger.warning("Skipping oracle validation: %s", exc)
        payload["skipped"] = str(exc)
    path = out_dir / "asym.json"
    write_json(path, payload)
    logger.info(
        "Asymptotics kappa=%d degenerate=%s. Saved to %s", model.kappa, model.degenerate, path
    )
    return path, passed


def run_structured(
    sys: SystemLike, tau_samples: Sequence[complex], out_dir: Path
) -> Tuple[Path, bool]:
    portrait = portrait_of(sys)
    ctx = portrait.system.structure
    payload: Dict = {"structure": ctx.kind if ctx is not None else None}
    passed = True
    if ctx is not None and ctx.kind is StructureKind.J_HAMILTONIAN:
        try:
            payload["forecast"] = hamiltonian_forecast(portrait)
        except SpecflowError as exc:
            logger.warning("No forecast: %s", exc)
            payload["forecast_error"] = str(exc)
    try:
        report = verify_symmetry(portrait, tau_samples)
        payload["symmetry"] = report
        passed = report.passed
    except OracleSizeError as exc:
        logger.warning("Skipping symmetry check: %s", exc)
        payload["skipped"] = str(exc)
    path = out_dir / "structured.json"
    write_json(path, payload)
    return path, passed


def run_nonneg(sys: SystemLike, i0: int, j0: int, out_dir: Path) -> Tuple[Path, bool]:
    system = sys if isinstance(sys, RankOneSystem) else sys.system
    report = divergence_count(system.A, i0, j0)
    path = out_dir / "nonneg.json"
    write_json(path, {"edge": [i0 + 1, j0 + 1], **report.model_dump()})
    logger.info(
        "Edge (%d, %d): l=%d index=%d. Saved to %s", i0 + 1, j0 + 1, report.l, report.index, path
    )
    return path, report.check


def run_verify(sys: SystemLike, out_dir: Path, seed: int = 0) -> Tuple[Path, bool]:
    from .verify import run_suites

    report = run_suites(portrait_of(sys), seed=seed)
    path = out_dir / "verify.json"
    write_json(path, {"system": report.system, "passed": report.passed, "suites": report.suites})
    failed = [s.name for s in report.suites if not s.passed and not s.skipped]
    if failed:
        logger.warning("Failed suites: %s", ", ".join(failed))
    return path, report.passed


def parse_floats(text: str, expected: Optional[int] = None) -> List[float]:
    """Comma-separated numbers from a command-line flag."""
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"Expected comma-separated numbers, got '{text}'") from exc
    if expected is not None and len(values) != expected:
        raise InputError(f"Expected {expected} numbers, got {len(values)}")
    if any(not math.isfinite(v) for v in values):
        raise InputError(f"Non-finite value in '{text}'")
    return values


def parse_complex_list(text: str) -> List[complex]:
    """Comma-separated real or complex numbers (Python syntax, e.g. 1e3 or 2+1j)."""
    try:
        return [complex(x.strip().replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"Expected comma-separated numbers, got '{text}'") from exc


def parse_edge(text: str, n: int) -> Tuple[int, int]:
    """1-based 'i,j' from the command line to a 0-based pair."""
    try:
        i, j = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"Edge must look like 'i,j', got '{text}'") from exc
    if not (1 <= i <= n and 1 <= j <= n):
        raise InputError(f"Edge ({i}, {j}) out of range 1..{n}")
    return i - 1, j - 1
