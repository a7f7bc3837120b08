"""Command-line entry point: config files, experiment drivers and CSV output.

Config files are flat ``key = value`` text, one pair per line, with ``#``
starting a comment::

    scenario = dam_break
    x_min = 0
    x_max = 1000
    n_cells = 2000
    cr = 0.2
    t_end = 30
    h1 = 10
    h0 = 1
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from . import __version__
from .analysis import ConvergenceRow, convergence_study, dispersion
from .fem import SingularSystemError
from .flux import GRAVITY, PositivityError
from .grid import Grid, GridError, averages_to_points
from .integrator import SimulationState, StepFailure, Trajectory, run
from .scenarios import OPTIONAL, REQUIRED, SCENARIOS, ScenarioConfig, ScenarioError, build

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

COMMON_REQUIRED = ("scenario", "x_min", "x_max", "n_cells", "cr", "t_end")
COMMON_OPTIONAL = ("g", "output_times", "max_steps")
STRING_PARAMS = ("boundary",)

DAM_BREAK_CASES = {1: (10.0, 1.0), 2: (10.0, 2.0), 3: (1.8, 1.0)}


class ConfigError(ValueError):
    """The config text cannot be turned into a valid scenario."""


def _number(key: str, text: str, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite")
    return value


def parse_config(text: str) -> ScenarioConfig:
    """Read a flat ``key = value`` config. Unknown or repeated keys are errors."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value

    missing = [k for k in COMMON_REQUIRED if k not in pairs]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    scenario = pairs.pop("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
    if scenario == "custom":
        raise ConfigError("the custom scenario needs a Python callable and cannot be set from a file")

    allowed = set(COMMON_REQUIRED) | set(COMMON_OPTIONAL) | set(REQUIRED[scenario]) | set(OPTIONAL[scenario])
    unknown = sorted(set(pairs) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) for {scenario}: {', '.join(unknown)}")

    params = {}
    for key in set(REQUIRED[scenario]) | set(OPTIONAL[scenario]):
        if key in pairs:
            params[key] = pairs[key] if key in STRING_PARAMS else _number(key, pairs[key])
    missing = [k for k in REQUIRED[scenario] if k not in params]
    if missing:
        raise ConfigError(f"missing required key(s) for {scenario}: {', '.join(missing)}")

    times = ()
    if "output_times" in pairs:
        times = tuple(_number("output_times", t.strip()) for t in pairs["output_times"].split(",") if t.strip())
    cr = _number("cr", pairs["cr"])
    if not 0.0 < cr <= 1.0:
        raise ConfigError(f"cr must lie in (0, 1], got {cr}")
    n_cells = _number("n_cells", pairs["n_cells"], int)
    try:
        return ScenarioConfig(
            scenario=scenario,
            x_min=_number("x_min", pairs["x_min"]),
            x_max=_number("x_max", pairs["x_max"]),
            n_cells=n_cells,
            cr=cr,
            t_end=_number("t_end", pairs["t_end"]),
            g=_number("g", pairs["g"]) if "g" in pairs else GRAVITY,
            output_times=times,
            params=params,
            **({"max_steps": _number("max_steps", pairs["max_steps"], int)} if "max_steps" in pairs else {}),
        )
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from exc


def render_config(config: ScenarioConfig) -> str:
    """Config text that :func:`parse_config` reads back to an equal config."""
    lines = [
        f"scenario = {config.scenario}",
        f"x_min = {config.x_min!r}",
        f"x_max = {config.x_max!r}",
        f"n_cells = {config.n_cells}",
        f"cr = {config.cr!r}",
        f"t_end = {config.t_end!r}",
        f"g = {config.g!r}",
        f"max_steps = {config.max_steps}",
    ]
    if config.output_times:
        lines.append("output_times = " + ", ".join(repr(t) for t in config.output_times))
    for key in sorted(config.params):
        value = config.params[key]
        lines.append(f"{key} = {value}" if isinstance(value, str) else f"{key} = {float(value)!r}")
    return "\n".join(lines) + "\n"


def _sci(values: Sequence[float]) -> str:
    return ",".join(f"{v:.17e}" for v in values)


def emit_profile_csv(snapshot: SimulationState, grid: Grid, out: IO[str]) -> None:
    """Write ``x,h,u,G`` at every cell center.

    ``h`` and ``G`` are center point values from the averages; ``u`` is the
    recovered nodal velocity.
    """
    h = averages_to_points(snapshot.h)
    G = averages_to_points(snapshot.G)
    u = snapshot.u.integer_nodes
    out.write("x,h,u,G\n")
    for row in zip(grid.centers, h, u, G):
        out.write(_sci(row) + "\n")


def emit_convergence_csv(rows: Sequence[ConvergenceRow], slope_h: float, slope_u: float, out: IO[str]) -> None:
    """Write ``dx,l1_h,l1_u`` rows and a trailing ``# slope_h=..., slope_u=...`` line."""
    if len(rows) < 2:
        raise ValueError("a convergence table needs at least two rows")
    out.write("dx,l1_h,l1_u\n")
    for r in rows:
        out.write(_sci((r.dx, r.l1_h, r.l1_u)) + "\n")
    out.write(f"# slope_h={slope_h:.9e}, slope_u={slope_u:.9e}\n")


@dataclass
class RunManifest:
    """Record of one run: resolved config, code version and provenance."""

    config: str
    version: str
    snapped: dict = field(default_factory=dict)
    interpretation: list = field(default_factory=list)
    wall_seconds: float = 0.0
    steps: int = 0
    t_final: float = 0.0
    status: str = "ok"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _snapped(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if k.endswith("_snapped")}


def _write_snapshots(trajectory: Trajectory, out_dir: Path | None, stdout: IO[str]) -> None:
    grid = trajectory.model.grid
    if out_dir is None:
        emit_profile_csv(trajectory.final, grid, stdout)
        return
    for k, snap in enumerate(trajectory.snapshots):
        with open(out_dir / f"profile_{k:04d}.csv", "w", newline="\n") as fh:
            emit_profile_csv(snap, grid, fh)
    with open(out_dir / "times.csv", "w", newline="\n") as fh:
        fh.write("index,t\n")
        for k, snap in enumerate(trajectory.snapshots):
            fh.write(f"{k},{snap.t:.17e}\n")


def _simulate(config: ScenarioConfig, out_dir: Path | None, stdout: IO[str], stderr: IO[str]) -> Trajectory:
    scenario = build(config)
    manifest = RunManifest(
        config=render_config(config),
        version=__version__,
        snapped=_snapped(scenario.initial.metadata),
        interpretation=list(scenario.interpretation),
    )
    start = time.perf_counter()
    try:
        trajectory = run(scenario)
    except Exception:
        manifest.status = "failed"
        raise
    finally:
        manifest.wall_seconds = time.perf_counter() - start
        if "trajectory" in locals():
            manifest.steps = trajectory.final.steps
            manifest.t_final = trajectory.final.t
        text = manifest.to_json()
        if out_dir is None:
            stderr.write(text)
        else:
            (out_dir / "manifest.json").write_text(text)
    _write_snapshots(trajectory, out_dir, stdout)
    return trajectory


def _out_dir(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args, stdout, stderr) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    _simulate(parse_config(text), _out_dir(args.out), stdout, stderr)
    return EXIT_OK


def _cmd_soliton(args, stdout, stderr) -> int:
    if args.cr <= 0 or args.cr > 1:
        raise ConfigError(f"cr must lie in (0, 1], got {args.cr}")
    base = ScenarioConfig(
        scenario="soliton",
        x_min=args.x_min,
        x_max=args.x_max,
        n_cells=max(1, int(round((args.x_max - args.x_min) / args.dx[0]))),
        cr=args.cr,
        t_end=args.t_end,
        g=args.g,
        params={"a0": args.a0, "a1": args.a1, "boundary": args.boundary},
    )
    result = convergence_study(base, args.dx, workers=args.workers)
    out_dir = _out_dir(args.out)
    if out_dir is None:
        emit_convergence_csv(result.rows, result.slope_h, result.slope_u, stdout)
    else:
        with open(out_dir / "convergence.csv", "w", newline="\n") as fh:
            emit_convergence_csv(result.rows, result.slope_h, result.slope_u, fh)
    return EXIT_OK


def _cmd_dam_break(args, stdout, stderr) -> int:
    h1, h0 = DAM_BREAK_CASES[args.case]
    length = args.x_max - args.x_min
    n = int(round(length / args.dx))
    if not math.isclose(n * args.dx, length, rel_tol=1e-9):
        raise ConfigError(f"dx={args.dx} does not divide the domain length {length}")
    config = ScenarioConfig(
        scenario="dam_break",
        x_min=args.x_min,
        x_max=args.x_max,
        n_cells=n,
        cr=args.cr,
        t_end=args.t_end,
        g=args.g,
        params={"h1": h1, "h0": h0},
    )
    trajectory = _simulate(config, _out_dir(args.out), stdout, stderr)
    h = trajectory.final.h[trajectory.model.grid.interior]
    stderr.write(f"# h range [{h.min():.12g}, {h.max():.12g}] at t={trajectory.final.t:.6g}\n")
    return EXIT_OK


def _cmd_dispersion(args, stdout, stderr) -> int:
    try:
        r = dispersion(args.k, args.h0, args.u0, args.g)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    stdout.write("k,h0,u0,mu,omega_plus,omega_minus,v_phase,v_group\n")
    stdout.write(_sci((args.k, args.h0, args.u0, r.mu, r.omega_plus, r.omega_minus, r.v_phase, r.v_group)) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serre1d", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log step retries and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario from a config file")
    p.add_argument("config", help="path to a key = value config file")
    p.add_argument("--out", help="directory for profile CSVs and manifest.json (default: final profile to stdout)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("soliton-convergence", help="L1 convergence ladder for the solitary wave")
    p.add_argument("--dx", type=float, nargs="+", default=[0.8, 0.4, 0.2, 0.1])
    p.add_argument("--a0", type=float, default=10.0)
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=-150.0)
    p.add_argument("--x-max", type=float, default=150.0)
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--cr", type=float, default=0.1)
    p.add_argument("--g", type=float, default=GRAVITY)
    p.add_argument("--boundary", choices=("exact", "still"), default="exact")
    p.add_argument("--workers", type=int, default=1, help="ladder entries run in this many processes")
    p.add_argument("--out", help="directory for convergence.csv (default: stdout)")
    p.set_defaults(func=_cmd_soliton)

    p = sub.add_parser("dam-break", help="dam break: 1 = (10, 1), 2 = (10, 2), 3 = (1.8, 1)")
    p.add_argument("case", type=int, choices=sorted(DAM_BREAK_CASES))
    p.add_argument("--dx", type=float, default=0.5)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=1000.0)
    p.add_argument("--t-end", type=float, default=30.0)
    p.add_argument("--cr", type=float, default=0.2)
    p.add_argument("--g", type=float, default=GRAVITY)
    p.add_argument("--out", help="directory for profile CSVs and manifest.json (default: final profile to stdout)")
    p.set_defaults(func=_cmd_dam_break)

    p = sub.add_parser("dispersion", help="linear frequencies and wave speeds")
    p.add_argument("k", type=float)
    p.add_argument("h0", type=float)
    p.add_argument("u0", type=float)
    p.add_argument("--g", type=float, default=GRAVITY)
    p.set_defaults(func=_cmd_dispersion)
    return parser


def main(argv: Sequence[str] | None = None, stdout: IO[str] | None = None, stderr: IO[str] | None = None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr)
    try:
        return args.func(args, stdout, stderr)
    except (ConfigError, ScenarioError, GridError) as exc:
        stderr.write(f"serre1d: config error: {exc}\n")
        return EXIT_CONFIG
    except (StepFailure, PositivityError, SingularSystemError, np.linalg.LinAlgError) as exc:
        stderr.write(f"serre1d: numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
