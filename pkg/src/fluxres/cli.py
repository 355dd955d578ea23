"""Command-line front end.

Usage::

    fluxres validate --preset fig1
    fluxres simulate --config run.toml --out results/
    fluxres sweep --preset fig3 --out results/
    fluxres optimize --preset fig3 --search 1.4 1.6 --tol 1e-3

Exit codes: 0 success, 2 invalid input or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfg
from .dynamics import find_cycles, integrate
from .errors import ConfigError, EmptyWindow, FlatObjective, FluxResError, InsufficientCycles, NumericalFailure
from .experiments import SweepSpec, run_sweep
from .invariant import default_window, drift_metrics, invariant_series_closed_form, invariant_series_numerical
from .model import InvalidParameters, NonPositiveFrequencySquared, PowerDrive, SinusoidDrive, closed_form_energy, closed_form_invariant, eval_omega, validate_params
from .optimize import find_optimal_exponent

log = logging.getLogger("fluxres")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

SIMULATE_COLUMNS = ("t", "phi", "phidot", "q", "energy_num", "omega", "energy_cf", "invariant_cf", "invariant_num")
SWEEP_COLUMNS = ("t", "omega", "xi", "energy_cf", "invariant_cf")


# -- emitters ---------------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip text for a float; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(text.encode("utf-8"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def provenance_block(run: cfg.RunConfig, command: str, **extra) -> dict:
    resolved = run.to_dict()
    block = {"command": command, "config_hash": cfg.config_hash(resolved), "config": resolved}
    block.update(extra)
    return block


# -- config handling --------------------------------------------------------


def resolve_config(args) -> cfg.RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        run = cfg.load_config(args.config)
    elif args.preset and args.preset != "custom":
        run = cfg.load_preset(args.preset)
    else:
        raise ConfigError("a --config file or a --preset (fig1, fig2, fig3) is required")
    if getattr(args, "horizon", None):
        h = args.horizon
        horizon = (0.0, h[0]) if len(h) == 1 else (h[0], h[1])
        if len(h) > 2 or not horizon[1] > horizon[0]:
            raise ConfigError("--horizon takes T or T0 T1 with T0 < T1")
        run = replace(run, horizon=horizon)
    if getattr(args, "window", None):
        a, b = args.window
        if not b > a:
            raise ConfigError("--window needs a < b")
        run = replace(run, window=(a, b))
    if getattr(args, "out", None):
        run = replace(run, output_dir=str(args.out))
    return run


def out_dir(run: cfg.RunConfig) -> Path:
    return Path(run.output_dir or ".")


def _metrics_or_none(series, window):
    try:
        return drift_metrics(series, window).as_dict()
    except EmptyWindow as exc:
        return {"window": list(window), "mean": None, "peak_to_peak": None, "rms_dev": None, "error": str(exc)}


# -- commands ---------------------------------------------------------------


def cmd_validate(run: cfg.RunConfig, args) -> int:
    try:
        report = validate_params(run.params, run.drive, run.horizon)
    except InvalidParameters as exc:
        report = exc.report
        _emit(args, json_text({**report.as_dict(), "passed": False, "message": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(args, json_text({**report.as_dict(), "passed": True}))
    return EXIT_OK


def cmd_simulate(run: cfg.RunConfig, args) -> int:
    params, drive, init = run.params, run.drive, run.init
    validate_params(params, drive, run.horizon)
    traj = integrate(params, drive, init, run.integrator, run.horizon)
    t = traj.t
    omega = np.asarray(eval_omega(params, t))
    e_cf = np.asarray(closed_form_energy(params, drive, init, t))
    i_cf = np.asarray(closed_form_invariant(params, drive, init, t))

    # numerical invariant lives on cycle midpoints; place each on its nearest row
    i_num = np.full(len(t), np.nan)
    num_series = None
    try:
        num_series = invariant_series_numerical(traj)
    except InsufficientCycles as exc:
        log.warning("numerical invariant unavailable: %s", exc)
    if num_series is not None:
        rows = np.clip(np.rint((num_series.t - t[0]) / run.integrator.sample_dt).astype(int), 0, len(t) - 1)
        i_num[rows] = num_series.values

    name = run.name
    base = out_dir(run)
    columns = zip(t, traj.phi, traj.phidot, traj.q, traj.energy, omega, e_cf, i_cf, i_num)
    write_atomic(base / f"{name}.csv", csv_text(SIMULATE_COLUMNS, columns))

    window = run.window or default_window(params)
    cf_series = invariant_series_closed_form(params, drive, init, run.horizon, run.integrator.sample_dt)
    summary = {
        "closed_form": _metrics_or_none(cf_series, window),
        "numerical": _metrics_or_none(num_series, window) if num_series is not None else None,
        "cycles": [{"t_start": c.t_start, "t_end": c.t_end, "t_mid": c.midpoint} for c in find_cycles(traj)],
        "numerical_invariant": (
            [{"t": float(a), "invariant": float(b)} for a, b in zip(num_series.t, num_series.values)]
            if num_series is not None else []
        ),
        "provenance": provenance_block(run, "simulate"),
    }
    write_atomic(base / f"{name}.json", json_text(summary))
    _status(args, f"wrote {base / (name + '.csv')} ({len(t)} rows) and {base / (name + '.json')}")
    return EXIT_OK


def _value_label(value: float) -> str:
    return format(value, "g")


def cmd_sweep(run: cfg.RunConfig, args) -> int:
    spec = SweepSpec.from_config(run)
    result = run_sweep(spec)
    base = out_dir(run)
    table = []
    for entry in result.entries:
        prov = entry.provenance
        params = cfg.params_from_dict(prov["resonator"])
        drive = cfg.drive_from_dict(prov["drive"])
        init = cfg.init_from_dict(prov["init"])
        t = entry.series.t
        rows = zip(t, np.asarray(eval_omega(params, t)), np.asarray(drive(params, t)) * np.ones_like(t),
                   np.asarray(closed_form_energy(params, drive, init, t)), entry.series.values)
        fname = f"{run.name}_{spec.axis}={_value_label(entry.value)}.csv"
        write_atomic(base / fname, csv_text(SWEEP_COLUMNS, rows))
        row = {"value": entry.value, "file": fname, **entry.metrics.as_dict(), "provenance": prov}
        if entry.numerical_metrics is not None:
            row["numerical"] = entry.numerical_metrics.as_dict()
        table.append(row)
    summary = {"axis": spec.axis, "metrics": table, "provenance": provenance_block(run, "sweep")}
    write_atomic(base / f"{run.name}_metrics.json", json_text(summary))
    _status(args, f"wrote {len(table)} series and {base / (run.name + '_metrics.json')}")
    return EXIT_OK


def cmd_optimize(run: cfg.RunConfig, args) -> int:
    opt = run.optimize
    search = tuple(args.search) if args.search else opt.search
    tol = args.tol if args.tol is not None else opt.tol
    window = run.window if args.window else (opt.window or run.window)
    if opt.xi0 is not None:
        xi0 = opt.xi0
    elif isinstance(run.drive, (PowerDrive, SinusoidDrive)):
        xi0 = run.drive.xi0
    else:
        xi0 = 0.0
    result = find_optimal_exponent(run.params, run.init, xi0, search, tol, window, opt.sample_dt)
    payload = {
        **result.as_dict(),
        "objective": result.objective_at_p_star,
        "xi0": xi0,
        "search": list(search),
        "tol": tol,
        "window": list(window) if window is not None else None,
        "provenance": provenance_block(run, "optimize", search=list(search), tol=tol),
    }
    text = json_text(payload)
    if run.output_dir is not None:
        write_atomic(out_dir(run) / f"{run.name}_optimize.json", text)
    _emit(args, text)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "simulate": cmd_simulate, "sweep": cmd_sweep, "optimize": cmd_optimize}


def _emit(args, text: str):
    if not args.quiet:
        sys.stdout.write(text)


def _status(args, line: str):
    if not args.quiet:
        print(line)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxres", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--preset", choices=cfg.PRESETS + ("custom",), help="shipped configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--horizon", type=float, nargs="+", metavar="T", help="T or T0 T1")
        p.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))
        p.add_argument("--quiet", action="store_true", help="write files only")
        if name == "optimize":
            p.add_argument("--search", type=float, nargs=2, metavar=("A", "B"))
            p.add_argument("--tol", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        run = resolve_config(args)
        return COMMANDS[args.command](run, args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FlatObjective as exc:
        print(f"error: flat objective: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, NonPositiveFrequencySquared, FluxResError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # keep the exit-code contract: 0, 2 or 3 only
        print(f"internal failure: {exc!r}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
