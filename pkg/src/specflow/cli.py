from pathlib import Path
from typing import Optional, Tuple

import typer

from . import catalog, pipeline
from .config import Settings, get_settings
from .errors import SpecflowError
from .logging_setup import setup_logging
from .models import RankOneSystem

app = typer.Typer(
    add_completion=False,
    help="Eigenvalue paths of rank-one perturbations A + tau u v^H: portraits, trajectories, "
    "level curves, asymptotics and self-checks.",
)

SYSTEM_ARG = typer.Argument(
    ..., exists=True, readable=True, dir_okay=False, help="System JSON file (A, u, v)."
)
OUT_OPT = typer.Option(
    None, "--out", help="Output directory (default: <data_dir>/<input file slug>)."
)


def _load(file: Path, out: Optional[Path]) -> Tuple[Settings, RankOneSystem, Path]:
    settings = get_settings()
    setup_logging(settings.log_level)
    system = pipeline.parse_system(file)
    return settings, system, pipeline.output_dir(file, settings, out)


def _fail(exc: Exception) -> typer.Exit:
    typer.echo(f"Error: {exc}")
    return typer.Exit(code=1)


@app.command()
def portrait(file: Path = SYSTEM_ARG, out: Optional[Path] = OUT_OPT) -> None:
    """
    Minimal polynomial, p_uv, q0, frozen eigenvalues, critical points and definability.
    """
    try:
        _, system, out_dir = _load(file, out)
        path = pipeline.run_portrait(system, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[portrait] {system.name}: saved to {path}")


@app.command()
def trace(
    file: Path = SYSTEM_ARG,
    theta: float = typer.Option(0.0, "--theta", help="Ray angle: tau = t e^{i theta}."),
    tmin: float = typer.Option(..., "--tmin", help="Start of the ray (t > 0)."),
    tmax: float = typer.Option(..., "--tmax", help="End of the ray."),
    steps: int = typer.Option(400, "--steps", help="Initial number of steps."),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Track eigenvalue branches along a ray in the tau plane.
    """
    try:
        _, system, out_dir = _load(file, out)
        csv_path, svg_path = pipeline.run_trace(system, theta, tmin, tmax, steps, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[trace] theta={theta} t in [{tmin}, {tmax}]: {csv_path}, {svg_path}")


@app.command()
def circle(
    file: Path = SYSTEM_ARG,
    t: float = typer.Option(..., "--t", help="Radius |tau| of the circle."),
    steps: int = typer.Option(400, "--steps", help="Initial number of steps."),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Track branches once around |tau| = t and report the monodromy permutation.
    """
    try:
        _, system, out_dir = _load(file, out)
        _, _, json_path = pipeline.run_circle(system, t, steps, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[circle] t={t}: saved to {json_path}")


@app.command()
def levelset(
    file: Path = SYSTEM_ARG,
    t: float = typer.Option(..., "--t", help="Level: curves |Q(z)| = 1/t."),
    window: Optional[str] = typer.Option(
        None, "--window", help="x0,x1,y0,y1 (default: square around sigma(A) and roots of p_uv)."
    ),
    res: int = typer.Option(256, "--res", help="Grid cells per side."),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Extract the level curves of |Q| at 1/t.
    """
    try:
        _, system, out_dir = _load(file, out)
        box = tuple(pipeline.parse_floats(window, expected=4)) if window else None
        csv_path, svg_path = pipeline.run_levelset(system, t, box, res, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[levelset] t={t}: {csv_path}, {svg_path}")


@app.command()
def asymptotics(
    file: Path = SYSTEM_ARG,
    tau_grid: Optional[str] = typer.Option(
        None, "--tau-grid", help="Comma-separated tau values (default: tau_min x 1, 10, 100)."
    ),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Large-|tau| expansion and its validation against the eigenvalue oracle.
    """
    try:
        _, system, out_dir = _load(file, out)
        grid = pipeline.parse_complex_list(tau_grid) if tau_grid else None
        path, passed = pipeline.run_asymptotics(system, grid, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[asymptotics] {'ok' if passed else 'FAILED'}: saved to {path}")
    if not passed:
        raise typer.Exit(code=2)


@app.command("check-structured")
def check_structured(
    file: Path = SYSTEM_ARG,
    tau_samples: str = typer.Option(
        "-10,-1,0.5,3,10", "--tau-samples", help="Comma-separated tau values."
    ),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Divergence forecast (J-Hamiltonian) and spectral symmetry checks.
    """
    try:
        _, system, out_dir = _load(file, out)
        samples = pipeline.parse_complex_list(tau_samples)
        path, passed = pipeline.run_structured(system, samples, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[check-structured] {'ok' if passed else 'FAILED'}: saved to {path}")
    if not passed:
        raise typer.Exit(code=2)


@app.command("check-nonneg")
def check_nonneg(
    file: Path = SYSTEM_ARG,
    edge: str = typer.Option(..., "--edge", help="Perturbed entry 'i,j' (1-based)."),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Number of eigenvalues escaping to infinity under A + tau e_i e_j^T.
    """
    try:
        _, system, out_dir = _load(file, out)
        i0, j0 = pipeline.parse_edge(edge, system.n)
        path, passed = pipeline.run_nonneg(system, i0, j0, out_dir)
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[check-nonneg] edge {edge}: {'ok' if passed else 'FAILED'}, saved to {path}")
    if not passed:
        raise typer.Exit(code=2)


@app.command()
def verify(
    file: Path = SYSTEM_ARG,
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed for sampled suites."),
    out: Optional[Path] = OUT_OPT,
) -> None:
    """
    Run every applicable self-check suite; exit code 2 when any suite fails.
    """
    try:
        settings, system, out_dir = _load(file, out)
        path, passed = pipeline.run_verify(
            system, out_dir, seed=settings.seed if seed is None else seed
        )
    except SpecflowError as exc:
        raise _fail(exc) from exc
    typer.echo(f"[verify] {system.name}: {'all passed' if passed else 'FAILED'}; see {path}")
    if not passed:
        raise typer.Exit(code=2)


@app.command()
def fixtures(
    directory: Path = typer.Argument(Path("fixtures"), help="Directory for the JSON files."),
) -> None:
    """
    Write the built-in example systems as input files.
    """
    setup_logging(get_settings().log_level)
    for name in catalog.names():
        path = pipeline.dump_system(catalog.build(name), directory / f"{name}.json")
        typer.echo(f"[fixtures] {path}")
