"""Command-line front end.

Subcommands: simulate | stability | basin | separatrix | portrait.
Common flags: --config PATH, --out DIR, --format csv|json|svg, --workers N,
--detect-ties.  Each flag can also be supplied through the environment with
the FRACDYN_ prefix (FRACDYN_OUT, FRACDYN_FORMAT, FRACDYN_WORKERS,
FRACDYN_DETECT_TIES) for CI use; explicit flags win.

Exit codes: 0 success, 2 configuration error, 3 unsupported analysis case,
4 internal numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import basin as basin_mod
from . import io as io_mod
from . import lotka as lotka_mod
from . import plots
from .config import RunConfig, load_config
from .errors import ConfigError, UnsupportedCaseError
from .solver import FractionalIVP, Trajectory, abm_solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERIC = 4

ENV_PREFIX = "FRACDYN_"


def _env_default(name: str):
    return os.environ.get(ENV_PREFIX + name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdyn",
        description="Fractional-order Lotka-Volterra simulation and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate the configured system and emit a trajectory CSV"),
        ("stability", "closed-form and numeric stability report as JSON"),
        ("basin", "scan a grid of initial conditions and map basins"),
        ("separatrix", "trace the integer-order basin border through the saddle"),
        ("portrait", "render a phase portrait figure for the configured run"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the INI run file")
        p.add_argument("--out", default=None, help="output directory (default: [output] dir)")
        p.add_argument(
            "--format",
            default=None,
            choices=("csv", "json", "svg"),
            help="csv/json emit data only; svg additionally renders figures",
        )
        p.add_argument("--workers", type=int, default=None, help="parallel scan workers")
        p.add_argument(
            "--detect-ties",
            action="store_true",
            default=None,
            help="record transversal self-intersections of the trajectory",
        )
    return parser


def _resolve_common(args) -> dict:
    out_dir = args.out or _env_default("OUT")
    out_format = args.format or _env_default("FORMAT")
    workers = args.workers
    if workers is None:
        raw = _env_default("WORKERS")
        workers = int(raw) if raw else 1
    detect_ties = args.detect_ties
    if detect_ties is None:
        raw = _env_default("DETECT_TIES")
        detect_ties = bool(raw) and raw.strip().lower() not in ("0", "false", "no", "")
    return {
        "out_dir": out_dir,
        "out_format": out_format,
        "workers": max(1, workers),
        "detect_ties": bool(detect_ties),
    }


def _load(args, common) -> RunConfig:
    overrides = {}
    if common["out_dir"]:
        overrides["out_dir"] = common["out_dir"]
    if common["out_format"]:
        overrides["out_format"] = common["out_format"]
    return load_config(args.config, overrides)


def _model_summary(cfg: RunConfig) -> dict:
    if cfg.model_kind == "lotka":
        sys_ = cfg.lotka_system
        return {
            "model": "lotka",
            "a": sys_.params.a,
            "b": sys_.params.b,
            "c": sys_.params.c,
            "alpha": str(sys_.alpha),
            "beta": str(sys_.beta),
        }
    return {
        "model": "generic",
        "dim": cfg.generic_model.rhs.dim,
        "orders": [str(o) for o in cfg.generic_model.orders],
    }


def _simulate_trajectory(cfg: RunConfig):
    """Integrate per config; returns (trajectory, csv column names, lifted flag)."""
    if cfg.model_kind == "lotka":
        system = cfg.lotka_system
        if system.case == 0:
            raise UnsupportedCaseError(
                "one order below 1 and one above cannot be simulated or analyzed"
            )
        if system.case == 2:
            lifted = lotka_mod.lift(system)
            y0 = list(cfg.y0) if cfg.y0 else [0.0, 0.0]
            if len(y0) == 2:
                y0 = y0 + [0.0, 0.0]  # derivative initial conditions default to rest
            if len(y0) != 4:
                raise ConfigError("[simulate] y0: lifted runs need 2 or 4 components")
            state0 = (y0[2], y0[3], y0[0], y0[1])  # internal order (y3, y4, y1, y2)
            ivp = lifted.as_ivp(state0, cfg.t_end, cfg.h)
            traj = abm_solve(ivp, escape_radius=cfg.escape_radius)
            # reorder stored states to (y1, y2, y3, y4) for output
            reordered = traj.states[:, [2, 3, 0, 1]]
            traj = Trajectory(times=traj.times, states=reordered, escaped=traj.escaped)
            return traj, ["t", "y1", "y2", "y3", "y4"], True
        if len(cfg.y0) != 2:
            raise ConfigError("[simulate] y0: need exactly 2 components")
        ivp = lotka_mod.as_ivp(system, cfg.y0, cfg.t_end, cfg.h)
        traj = abm_solve(ivp, escape_radius=cfg.escape_radius)
        return traj, ["t", "y1", "y2"], False
    model = cfg.generic_model
    dim = model.rhs.dim
    if len(cfg.y0) != dim:
        raise ConfigError(f"[simulate] y0: need {dim} components for dim={dim}")
    ivp = FractionalIVP(
        orders=tuple(o.value for o in model.orders),
        rhs=model.rhs,
        y0=cfg.y0,
        t_end=cfg.t_end,
        h=cfg.h,
        vectorized=True,
    )
    traj = abm_solve(ivp, escape_radius=cfg.escape_radius)
    return traj, ["t"] + [f"y{i+1}" for i in range(dim)], False


def cmd_simulate(args, common) -> int:
    cfg = _load(args, common)
    out = io_mod.ensure_dir(cfg.out_dir)
    traj, columns, lifted = _simulate_trajectory(cfg)
    csv_path = os.path.join(out, "trajectory.csv")
    io_mod.write_trajectory_csv(csv_path, traj, columns)
    sidecar = {
        "schema": f"simulate/{io_mod.SCHEMA_VERSION}",
        "escaped": traj.escaped,
        "lifted": lifted,
        "t_end": cfg.t_end,
        "h": cfg.h,
        "n_rows": len(traj),
        "y0": list(cfg.y0),
        "final_state": [float(v) for v in traj.final_state],
        "outputs": {"trajectory_csv": csv_path},
    }
    sidecar.update(_model_summary(cfg))
    ties = None
    if common["detect_ties"]:
        ties = basin_mod.detect_self_intersection(traj)
        sidecar["ties"] = [
            {"segment_i": i, "segment_j": j, "point": [x, y]} for i, j, (x, y) in ties
        ]
    figure_path = None
    if cfg.out_format == "svg":
        eqs = (
            lotka_mod.equilibria(cfg.lotka_system.params)
            if cfg.model_kind == "lotka"
            else None
        )
        figure_path = plots.phase_portrait(
            os.path.join(out, "trajectory.svg"), traj, equilibria=eqs, ties=ties
        )
        sidecar["outputs"]["figure"] = figure_path
    io_mod.write_json(os.path.join(out, "simulate.json"), sidecar)
    print(f"wrote {csv_path}" + (f" and {figure_path}" if figure_path else ""))
    return EXIT_OK


def cmd_stability(args, common) -> int:
    cfg = _load(args, common)
    if cfg.model_kind != "lotka":
        raise ConfigError("stability analysis needs the lotka model")
    out = io_mod.ensure_dir(cfg.out_dir)
    system = cfg.lotka_system
    path = os.path.join(out, "stability.json")
    if system.case == 0:
        payload = {
            "schema": f"stability/{io_mod.SCHEMA_VERSION}",
            "error": "unsupported_case",
            "detail": "one order below 1 and one above is not covered by the analysis",
        }
        payload.update(_model_summary(cfg))
        io_mod.write_json(path, payload)
        print(f"wrote {path} (unsupported case)", file=sys.stderr)
        return EXIT_UNSUPPORTED
    closed = lotka_mod.closed_form_stability(system)
    reports = lotka_mod.analyze(system)
    eq_points = (
        lotka_mod.equilibria(system.params)
        if system.case == 1
        else lotka_mod.lift(system).equilibria()
    )
    payload = {
        "schema": f"stability/{io_mod.SCHEMA_VERSION}",
        "case": system.case,
        "M": reports["origin"].M,
        "sector_half_angle": reports["origin"].sector_half_angle,
        "equilibria": [],
    }
    payload.update(_model_summary(cfg))
    for name, point in zip(("origin", "coexistence"), eq_points):
        rep = reports[name]
        entry = rep.as_dict()
        entry["name"] = name
        entry["point"] = [float(v) for v in point]
        entry["closed_form"] = getattr(closed, name).value
        entry["numeric"] = rep.verdict.value
        payload["equilibria"].append(entry)
    io_mod.write_json(path, payload)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_basin(args, common) -> int:
    cfg = _load(args, common)
    if cfg.grid is None:
        raise ConfigError("basin runs need a [basin] section with a grid")
    out = io_mod.ensure_dir(cfg.out_dir)
    if cfg.model_kind == "lotka":
        system = cfg.lotka_system
        if system.case != 1:
            raise UnsupportedCaseError("basin scans need both orders in (0, 1]")
        scan_input = system
    else:
        scan_input = cfg.generic_model.scan_model()
    basin = basin_mod.scan_basin(scan_input, cfg.grid, cfg.scan, workers=common["workers"])
    csv_path = os.path.join(out, "basin.csv")
    io_mod.write_basin_csv(csv_path, basin)
    converged_codes, counts = np.unique(basin.labels[basin.labels >= 0], return_counts=True)
    boundary = np.empty((0, 2))
    target = None
    if converged_codes.size:
        target = int(converged_codes[np.argmax(counts)])
        boundary = basin_mod.boundary_extract(basin, target)
    boundary_path = os.path.join(out, "boundary.csv")
    io_mod.write_boundary_csv(boundary_path, boundary)
    sidecar = {
        "schema": f"basin/{io_mod.SCHEMA_VERSION}",
        "metadata": basin.metadata,
        "grid": {
            "y1_range": list(basin.grid.y1_range),
            "y2_range": list(basin.grid.y2_range),
            "n1": basin.grid.n1,
            "n2": basin.grid.n2,
        },
        "counts": {
            basin_mod.label_name(int(code)): int((basin.labels == code).sum())
            for code in np.unique(basin.labels)
        },
        "boundary_target": target,
        "note": None if boundary.size else "label map has no basin boundary",
        "outputs": {"basin_csv": csv_path, "boundary_csv": boundary_path},
    }
    figure_path = None
    if cfg.out_format == "svg":
        figure_path = plots.basin_heatmap(os.path.join(out, "basin.svg"), basin, boundary)
        sidecar["outputs"]["figure"] = figure_path
    io_mod.write_json(os.path.join(out, "basin.json"), sidecar)
    print(f"wrote {csv_path}" + (f" and {figure_path}" if figure_path else ""))
    return EXIT_OK


def cmd_separatrix(args, common) -> int:
    cfg = _load(args, common)
    if cfg.model_kind != "lotka":
        raise ConfigError("separatrix tracing needs the lotka model")
    out = io_mod.ensure_dir(cfg.out_dir)
    params = cfg.lotka_system.params
    trace = lotka_mod.separatrix_trace(
        params,
        arclength_budget=cfg.separatrix_budget,
        step=cfg.separatrix_step,
        max_points=cfg.separatrix_max_points,
    )
    residuals = [lotka_mod.separatrix_residual(params, p) for p in trace.points]
    csv_path = os.path.join(out, "separatrix.csv")
    io_mod.write_separatrix_csv(csv_path, trace, residuals)
    sidecar = {
        "schema": f"separatrix/{io_mod.SCHEMA_VERSION}",
        "n_points": len(trace.points),
        "truncated": trace.truncated,
        "max_abs_residual": max((abs(r) for r in residuals), default=0.0),
        "budget": cfg.separatrix_budget,
        "step": cfg.separatrix_step,
        "outputs": {"separatrix_csv": csv_path},
    }
    sidecar.update(_model_summary(cfg))
    figure_path = None
    if cfg.out_format == "svg":
        figure_path = plots.separatrix_figure(
            os.path.join(out, "separatrix.svg"),
            trace,
            equilibria=lotka_mod.equilibria(params),
        )
        sidecar["outputs"]["figure"] = figure_path
    io_mod.write_json(os.path.join(out, "separatrix.json"), sidecar)
    print(f"wrote {csv_path}" + (f" and {figure_path}" if figure_path else ""))
    return EXIT_OK


def cmd_portrait(args, common) -> int:
    cfg = _load(args, common)
    out = io_mod.ensure_dir(cfg.out_dir)
    traj, _, _ = _simulate_trajectory(cfg)
    ties = basin_mod.detect_self_intersection(traj) if common["detect_ties"] else None
    eqs = (
        lotka_mod.equilibria(cfg.lotka_system.params) if cfg.model_kind == "lotka" else None
    )
    figure_path = plots.phase_portrait(
        os.path.join(out, "portrait.svg"), traj, equilibria=eqs, ties=ties
    )
    sidecar = {
        "schema": f"portrait/{io_mod.SCHEMA_VERSION}",
        "escaped": traj.escaped,
        "outputs": {"figure": figure_path},
    }
    if ties is not None:
        sidecar["ties"] = [
            {"segment_i": i, "segment_j": j, "point": [x, y]} for i, j, (x, y) in ties
        ]
    sidecar.update(_model_summary(cfg))
    io_mod.write_json(os.path.join(out, "portrait.json"), sidecar)
    print(f"wrote {figure_path}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "stability": cmd_stability,
    "basin": cmd_basin,
    "separatrix": cmd_separatrix,
    "portrait": cmd_portrait,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    common = _resolve_common(args)
    try:
        return _COMMANDS[args.command](args, common)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedCaseError as exc:
        print(f"unsupported case: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())
