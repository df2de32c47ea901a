"""Command-line front end: run, sweep, fit and extrapolate.

Configuration files are flat ``key = value`` text with one dotted level,
e.g.::

    model.type = spin_boson
    model.spin = half
    model.omega = 1.0
    bath.alpha = 0.3
    bath.omega_c = 5.0
    bath.T = 0.0
    sim.delta = 0.1
    sim.steps = 20
    sim.K = 5
    sim.lambda_c = 1e-12
    sim.mode = symmetrized
    sim.reduce = false

Two-spin runs use ``model.type = two_spin`` with ``bath.R`` and ``bath.D``.
Optional keys: ``sim.max_bond``, ``bath.omega_max``, ``bath.quad_tol``.

Trajectory CSV schema: ``step,time,<obs...>,trace_error,bond_max,n_tot``
with '#' comment lines and 17-significant-digit floats (bit-exact round
trips).  Exit codes: 0 success, 2 configuration or schema error,
3 numerical failure, 4 partial sweep failure, 5 analysis error.
The ``TEMPOSIM_WORKERS`` environment variable caps sweep parallelism.
"""

import argparse
import concurrent.futures
import json
import math
import os
import sys
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .analysis import extrapolate_gamma, fit_exponential
from .bath import BathConfig
from .engine import SimulationConfig, Trajectory, run_tempo
from .errors import (
    ConfigError,
    ExtrapolationError,
    FitWindowError,
    NumericalBlowupError,
    QuadratureError,
    SvdConvergenceError,
    TempoSimError,
)
from .models import SpinBosonSpec, TwoSpinSpec, build_spin_boson, build_two_spin
from .tensornet import TruncationPolicy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4
EXIT_ANALYSIS = 5

SWEEP_PARAMS = {
    "alpha": "bath.alpha",
    "K": "sim.K",
    "lambda_c": "sim.lambda_c",
    "delta": "sim.delta",
}

_KNOWN_KEYS = {
    "model.type", "model.spin", "model.omega",
    "bath.alpha", "bath.omega_c", "bath.T", "bath.R", "bath.D",
    "bath.omega_max", "bath.quad_tol",
    "sim.delta", "sim.steps", "sim.K", "sim.lambda_c", "sim.mode",
    "sim.reduce", "sim.max_bond",
}


def fmt(value: float) -> str:
    """17 significant digits: enough for a float64 round trip."""
    return format(float(value), ".17g")


def parse_config_text(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _get(cfg: Dict[str, str], key: str, cast, default=None):
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r}")
    try:
        value = cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key!r}: {cfg[key]!r}") from exc
    return value


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(text)


def build_simulation(cfg: Dict[str, str]) -> SimulationConfig:
    """Translate flat config keys into a SimulationConfig.

    Raises ConfigError naming the offending key on any invalid value.
    """
    model_type = _get(cfg, "model.type", str)
    temperature = _get(cfg, "bath.T", float, 0.0)
    try:
        if model_type == "spin_boson":
            parts = build_spin_boson(SpinBosonSpec(
                spin=_get(cfg, "model.spin", str, "half"),
                omega=_get(cfg, "model.omega", float, 1.0),
                alpha=_get(cfg, "bath.alpha", float),
                omega_c=_get(cfg, "bath.omega_c", float),
                temperature=temperature,
            ))
        elif model_type == "two_spin":
            parts = build_two_spin(TwoSpinSpec(
                omega=_get(cfg, "model.omega", float, 1.0),
                alpha=_get(cfg, "bath.alpha", float),
                omega_c=_get(cfg, "bath.omega_c", float),
                temperature=temperature,
                separation=_get(cfg, "bath.R", float),
                dim=_get(cfg, "bath.D", int),
            ))
        else:
            raise ConfigError(f"model.type must be 'spin_boson' or "
                              f"'two_spin', got {model_type!r}")
        bath = BathConfig(
            temperature=temperature,
            omega_max=_get(cfg, "bath.omega_max", float, None)
            if "bath.omega_max" in cfg else None,
            quad_tol=_get(cfg, "bath.quad_tol", float, 1e-10),
        )
        policy = TruncationPolicy(
            relative_cutoff=_get(cfg, "sim.lambda_c", float, 1e-10),
            max_bond=_get(cfg, "sim.max_bond", int, None)
            if "sim.max_bond" in cfg else None,
        )
        return SimulationConfig(
            system=parts.system,
            density=parts.density,
            bath=bath,
            delta=_get(cfg, "sim.delta", float),
            steps=_get(cfg, "sim.steps", int),
            memory=_get(cfg, "sim.K", int),
            policy=policy,
            mode=_get(cfg, "sim.mode", str, "symmetrized"),
            observables=parts.observables,
            reduce=_get(cfg, "sim.reduce", _bool, False),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        # invalid combinations surface from the dataclass validators; map
        # them onto the closest config key for actionable messages
        message = str(exc)
        aliases = {"delta": "sim.delta", "steps": "sim.steps",
                   "memory": "sim.K", "mode": "sim.mode",
                   "cutoff": "sim.lambda_c", "max_bond": "sim.max_bond",
                   "alpha": "bath.alpha", "omega_c": "bath.omega_c",
                   "temperature": "bath.T", "T >=": "bath.T",
                   "separation": "bath.R", "dimension": "bath.D",
                   "spin": "model.spin"}
        key = next((alias for pattern, alias in aliases.items()
                    if pattern in message), None)
        prefix = f"{key}: " if key else ""
        raise ConfigError(prefix + message) from exc


def _atomic_write(path: str, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def write_trajectory_csv(path: str, traj: Trajectory):
    names = list(traj.observables)
    lines = ["# temposim trajectory",
             "step,time," + ",".join(names) + ",trace_error,bond_max,n_tot"]
    for i, t in enumerate(traj.times):
        obs = ",".join(fmt(traj.observables[name][i]) for name in names)
        lines.append(
            f"{i},{fmt(t)},{obs},{fmt(traj.trace_error[i])},"
            f"{traj.stats.bond_max[i]},{traj.stats.n_tot[i]}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv_columns(path: str) -> Dict[str, np.ndarray]:
    """Read a comma-separated file with one header row into named columns."""
    with open(path, encoding="utf-8") as handle:
        rows = [line.strip() for line in handle
                if line.strip() and not line.startswith("#")]
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = rows[0].split(",")
    if len(header) < 2:
        raise ConfigError(f"{path}: expected at least two columns, "
                          f"got {rows[0]!r}")
    data = []
    for row in rows[1:]:
        fields = row.split(",")
        if len(fields) != len(header):
            raise ConfigError(f"{path}: row has {len(fields)} fields, "
                              f"header has {len(header)}")
        data.append([float(f) for f in fields])
    arr = np.asarray(data)
    return {name: arr[:, i] for i, name in enumerate(header)}


def _run_to_dir(cfg_dict: Dict[str, str], out_dir: str) -> Trajectory:
    os.makedirs(out_dir, exist_ok=True)
    sim = build_simulation(cfg_dict)
    started = time.time()
    traj = run_tempo(sim)
    finished = time.time()
    csv_path = os.path.join(out_dir, "trajectory.csv")
    write_trajectory_csv(csv_path, traj)
    manifest = {
        "version": __version__,
        "config": dict(sorted(cfg_dict.items())),
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                     time.gmtime(started)),
        "finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                      time.gmtime(finished)),
        "wall_time_seconds": finished - started,
        "stats": {
            "steps": int(sim.steps),
            "bond_max": int(traj.stats.bond_max.max()),
            "n_tot_final": int(traj.stats.n_tot[-1]),
            "discarded_weight": float(traj.stats.discarded_weight[-1]),
            "max_trace_error": float(traj.trace_error.max()),
        },
        "outputs": [csv_path],
    }
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  json.dumps(manifest, indent=2) + "\n")
    return traj


def cmd_run(config_path: str, out_dir: str) -> int:
    try:
        with open(config_path, encoding="utf-8") as handle:
            cfg_dict = parse_config_text(handle.read())
        _run_to_dir(cfg_dict, out_dir)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowupError, SvdConvergenceError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _sweep_entry(args: Tuple[Dict[str, str], str, str]) -> Dict[str, object]:
    cfg_dict, out_dir, fit_column = args
    traj = _run_to_dir(cfg_dict, out_dir)
    gamma = math.nan
    if fit_column in traj.observables:
        try:
            gamma = fit_exponential(traj.times,
                                    traj.observables[fit_column]).gamma
        except FitWindowError:
            pass
    return {
        "gamma": gamma,
        "n_tot": int(traj.stats.n_tot[-1]),
        "bond_max": int(traj.stats.bond_max.max()),
    }


def _workers() -> int:
    env = os.environ.get("TEMPOSIM_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, (os.cpu_count() or 1) - 1)


def cmd_sweep(config_path: str, param: str, values: List[str],
              out_dir: str) -> int:
    if param not in SWEEP_PARAMS:
        print(f"configuration error: unknown sweep parameter {param!r} "
              f"(choose from {sorted(SWEEP_PARAMS)})", file=sys.stderr)
        return EXIT_CONFIG
    if not values:
        print("configuration error: empty sweep value list", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(config_path, encoding="utf-8") as handle:
            base_cfg = parse_config_text(handle.read())
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)

    fit_column = "P" if base_cfg.get("model.type") == "two_spin" else "sz"
    jobs = []
    for value in values:
        cfg_dict = dict(base_cfg)
        cfg_dict[SWEEP_PARAMS[param]] = value
        run_dir = os.path.join(out_dir, f"run_{param}_{value}")
        jobs.append((cfg_dict, run_dir, fit_column))

    results: Dict[str, object] = {}
    failures: Dict[str, str] = {}
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            futures = {pool.submit(_sweep_entry, job): job[0][SWEEP_PARAMS[param]]
                       for job in jobs}
            for future in concurrent.futures.as_completed(futures):
                value = futures[future]
                try:
                    results[value] = future.result()
                except TempoSimError as exc:
                    failures[value] = str(exc)
    else:
        for job in jobs:
            value = job[0][SWEEP_PARAMS[param]]
            try:
                results[value] = _sweep_entry(job)
            except TempoSimError as exc:
                failures[value] = str(exc)

    lines = ["# temposim sweep over " + param, "value,gamma,n_tot,bond_max"]
    for value in values:
        if value in results:
            row = results[value]
            lines.append(f"{value},{fmt(row['gamma'])},{row['n_tot']},"
                         f"{row['bond_max']}")
    _atomic_write(os.path.join(out_dir, "summary.csv"),
                  "\n".join(lines) + "\n")

    for value, message in failures.items():
        print(f"sweep entry {param}={value} failed: {message}",
              file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def _emit_json(payload: Dict[str, object], out_path: Optional[str]):
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        _atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


def cmd_fit(csv_path: str, window: Optional[Tuple[float, float]],
            out_path: Optional[str], column: Optional[str] = None) -> int:
    try:
        cols = read_csv_columns(csv_path)
        if "time" not in cols:
            raise ConfigError(f"{csv_path}: no 'time' column")
        reserved = {"step", "time", "trace_error", "bond_max", "n_tot"}
        obs = [name for name in cols if name not in reserved]
        if not obs:
            raise ConfigError(f"{csv_path}: no observable columns")
        name = column or obs[0]
        if name not in cols:
            raise ConfigError(f"{csv_path}: no column {name!r}")
    except ConfigError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        fit = fit_exponential(cols["time"], cols[name], window)
    except FitWindowError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    _emit_json({
        "column": name,
        "gamma": fit.gamma,
        "amplitude": fit.amplitude,
        "window": list(fit.window),
        "residual_rms": fit.residual_rms,
    }, out_path)
    return EXIT_OK


def cmd_extrapolate(csv_path: str, out_path: Optional[str]) -> int:
    try:
        cols = read_csv_columns(csv_path)
        if "value" not in cols or "gamma" not in cols:
            raise ConfigError(f"{csv_path}: expected 'value' and 'gamma' "
                              "columns (sweep summary)")
    except ConfigError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    points = [(k, g) for k, g in zip(cols["value"], cols["gamma"])
              if not math.isnan(g)]
    try:
        result = extrapolate_gamma(points)
    except (ExtrapolationError, ValueError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    _emit_json({
        "gamma_inf": result.gamma_inf,
        "coefficients": list(result.coefficients),
        "points": [list(p) for p in result.points],
    }, out_path)
    return EXIT_OK


def _parse_window(text: Optional[str]):
    if text is None:
        return None
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--window expects 't_lo,t_hi', got {text!r}") \
            from exc
    return (lo, hi)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="temposim",
        description="Non-Markovian open-system dynamics with time-evolving "
                    "matrix product operators.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="propagate one configuration")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="run one value of a parameter "
                                           "per entry, in parallel")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True,
                         choices=sorted(SWEEP_PARAMS))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list")
    p_sweep.add_argument("--out", required=True)

    p_fit = sub.add_parser("fit", help="exponential tail fit of a "
                                       "trajectory CSV")
    p_fit.add_argument("trajectory")
    p_fit.add_argument("--window", help="t_lo,t_hi")
    p_fit.add_argument("--column")
    p_fit.add_argument("--out")

    p_ext = sub.add_parser("extrapolate", help="infinite-memory decay rate "
                                               "from a sweep summary CSV")
    p_ext.add_argument("summary")
    p_ext.add_argument("--out")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        return cmd_sweep(args.config, args.param, values, args.out)
    if args.command == "fit":
        try:
            window = _parse_window(args.window)
        except ConfigError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_fit(args.trajectory, window, args.out, args.column)
    if args.command == "extrapolate":
        return cmd_extrapolate(args.summary, args.out)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
