"""Command-line entry point: ``fibregate run|sweep|decouple|spectrum|list-presets``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import gates
from .dynamics import find_decoupling_times, kraus_set
from .hilbert import enumerate_sector
from .model import build_hamiltonian, normal_mode_frequencies
from .open_system import IntegrationError
from .scenarios import (PRESETS, ConfigError, ResultTable, config_from_mapping, emit_csv,
                        load_config, preset_config, run_scenario, sweep, write_csv)

_OVERRIDES = {
    "g1": "g1", "g2": "g2", "nu": "nu", "Delta": "Delta", "phi": "phi", "kappa": "kappa",
    "gamma": "gamma", "beta": "beta", "t_max": "t_max", "dt": "dt", "target": "target",
    "theta": "theta", "seed": "seed", "initial_state": "initial_state", "outputs": "outputs",
}


def _add_overrides(p: argparse.ArgumentParser) -> None:
    for name in ("g1", "g2", "nu", "Delta", "phi", "kappa", "gamma", "beta", "theta"):
        p.add_argument(f"--{name}", dest=name, default=None)
    p.add_argument("--t-max", dest="t_max", default=None)
    p.add_argument("--dt", default=None)
    p.add_argument("--target", default=None, choices=("swap", "cphase", "none"))
    p.add_argument("--seed", default=None)
    p.add_argument("--initial-state", dest="initial_state", default=None)
    p.add_argument("--outputs", default=None, help="comma-separated observables")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--g-hz", dest="g_hz", type=float, default=None,
                   help="reference coupling in Hz, reported in a footer comment")


def _resolve(source: str | None, args):
    if source is None:
        cfg = config_from_mapping({})
    elif source in PRESETS:
        cfg = preset_config(source)
    elif os.path.exists(source):
        cfg = load_config(source)
    else:
        raise ConfigError("source", f"{source!r} is neither a preset nor a config file")
    overrides = {key: getattr(args, attr) for attr, key in _OVERRIDES.items()
                 if getattr(args, attr, None) is not None}
    return config_from_mapping(overrides, cfg)


def _footer(args) -> list[str]:
    if args.g_hz is None:
        return []
    return [f"g = {args.g_hz!r} Hz; time unit 1/g = {1.0 / args.g_hz!r} s"]


def _write(table: ResultTable, args) -> None:
    if args.out:
        emit_csv(table, args.out, _footer(args))
    else:
        write_csv(table, sys.stdout, _footer(args))


def cmd_run(args) -> None:
    cfg = _resolve(args.source, args)
    _write(run_scenario(cfg), args)


def cmd_sweep(args) -> None:
    cfg = _resolve(args.source, args)
    values = [v for v in args.values.split(",") if v.strip()]
    results = sweep(cfg, args.axis, values, workers=args.workers)
    merged = None
    for value, table in results.items():
        if merged is None:
            merged = ResultTable([args.axis] + table.columns,
                                 units={args.axis: "1", **table.units})
        merged.rows += [(float(value),) + r for r in table.rows]
    if merged is None:
        merged = ResultTable([args.axis])
    _write(merged, args)


def cmd_decouple(args) -> None:
    cfg = _resolve(args.source, args)
    p = cfg.params.closed()
    cols = ["t", "leakage", "theta_pi", "F_swap_opt", "F_cphase_opt"]
    table = ResultTable(cols, units={"t": "1/g", "theta_pi": "pi rad"})
    max_leak = None if args.max_leakage is None else float(args.max_leakage)
    for t, lk in find_decoupling_times(p, cfg.t_max, cfg.dt, max_leakage=max_leak):
        ks = kraus_set(p, t)
        ch = gates.channel_from_kraus(ks)
        try:
            theta = gates.extract_controlled_phase(ks).theta
            f_cp = gates.fidelity_local_phase_optimized(ch, theta)[0]
        except gates.PhaseUndefinedError:
            theta, f_cp = math.nan, math.nan
        table.rows.append((t, lk, theta / math.pi, gates.swap_fidelity_optimized(ch)[0], f_cp))
    _write(table, args)


def cmd_spectrum(args) -> None:
    cfg = _resolve(args.source, args)
    table = ResultTable(["sector", "index", "eigenvalue"], units={"eigenvalue": "g"})
    for n in range(3):
        w = np.linalg.eigvalsh(build_hamiltonian(cfg.params, n).matrix)
        table.rows += [(float(n), float(i), float(x)) for i, x in enumerate(w)]
    freqs, _ = normal_mode_frequencies(cfg.params)
    table.comments.append("normal modes (c, c-, c+): " + ", ".join(repr(float(f)) for f in freqs))
    table.comments.append("sector dims: " + ", ".join(str(enumerate_sector(n).dim) for n in range(3)))
    _write(table, args)


def cmd_list_presets(args) -> None:
    for name, values in PRESETS.items():
        print(name + "\t" + " ".join(f"{k}={v}" for k, v in values.items()))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibregate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a preset or config file")
    p.add_argument("source", help="preset name or path to a key = value config")
    _add_overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat a run along one parameter axis")
    p.add_argument("source", nargs="?", default=None)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--workers", type=int, default=1)
    _add_overrides(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decouple", help="list decoupling times and gate data")
    p.add_argument("source", nargs="?", default=None)
    p.add_argument("--max-leakage", dest="max_leakage", default=None)
    _add_overrides(p)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("spectrum", help="sector eigenvalues and normal modes")
    p.add_argument("source", nargs="?", default=None)
    _add_overrides(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("list-presets", help="print the named presets")
    p.set_defaults(func=cmd_list_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.field, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(json.dumps({"error": "integration", "message": str(exc)}), file=sys.stderr)
        return 3
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 4
    return 0
