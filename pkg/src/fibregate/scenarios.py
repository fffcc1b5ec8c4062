"""Scenario configs, named presets, runners and CSV output."""

from __future__ import annotations

import concurrent.futures
import csv
import math
import re
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import gates
from .dynamics import kraus_set, leakage as closed_leakage
from .entanglement import entanglement_of_formation
from .hilbert import ATOMIC_STATES, full_space
from .model import SystemParams
from .open_system import DIM, build_liouvillian, propagated_operator_basis

OBSERVABLES = ("leakage", "fidelity_raw", "fidelity_phase_opt", "fidelity_mc",
               "theta", "eof", "populations")
TARGETS = ("swap", "cphase", "none")
_R2 = 1 / math.sqrt(2)
INITIAL_STATES = {
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
    "++": np.full(4, 0.5, dtype=complex),
    "+0": np.array([_R2, 0, _R2, 0], dtype=complex),
    "0+": np.array([_R2, _R2, 0, 0], dtype=complex),
    "psi+": np.array([0, _R2, _R2, 0], dtype=complex),
    "phi+": np.array([_R2, 0, 0, _R2], dtype=complex),
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ScenarioConfig:
    params: SystemParams = field(default_factory=SystemParams)
    t_max: float = 5.0
    dt: float = 0.01
    target: str = "swap"
    theta: float = 0.0
    initial_state: str = "++"
    outputs: tuple[str, ...] = ("leakage", "fidelity_raw", "fidelity_phase_opt")
    seed: int = 0
    mc_samples: int = 2000

    def __post_init__(self):
        if not self.t_max > 0:
            raise ConfigError("t_max", "must be > 0")
        if not self.dt > 0:
            raise ConfigError("dt", "must be > 0")
        if self.target not in TARGETS:
            raise ConfigError("target", f"must be one of {TARGETS}")
        if self.initial_state not in INITIAL_STATES:
            raise ConfigError("initial_state", f"unknown state {self.initial_state!r}")
        for name in self.outputs:
            if name not in OBSERVABLES:
                raise ConfigError("outputs", f"unknown observable {name!r}")
        if self.mc_samples < 100:
            raise ConfigError("mc_samples", "must be >= 100")

    def times(self) -> np.ndarray:
        n = int(round(self.t_max / self.dt))
        return np.arange(n + 1) * self.dt


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple[float, ...]] = field(default_factory=list)
    units: dict = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self):
        return len(self.rows)


# --------------------------------------------------------------------------- #
# presets: plain data, interpreted by the same loader as config files
# --------------------------------------------------------------------------- #

_SWAP = {"g1": 1, "g2": 1, "Delta": 0, "t_max": 5, "dt": 0.01, "target": "swap",
         "outputs": "leakage,fidelity_raw,fidelity_phase_opt"}
_CPHASE = {"g1": 1, "g2": 1.5, "nu": 100, "Delta": 10, "t_max": 6, "dt": 0.01,
           "target": "cphase", "theta": "-0.15pi",
           "outputs": "leakage,theta,fidelity_raw,fidelity_phase_opt"}
_EOF = {"g1": 1, "nu": 100, "Delta": 10, "t_max": 30, "dt": 0.02, "target": "none",
        "initial_state": "++", "outputs": "eof"}

PRESETS: dict[str, dict] = {
    "fig1-swap-nu1.0": {**_SWAP, "nu": 1.0},
    "fig1-swap-nu1.1": {**_SWAP, "nu": 1.1},
    "fig1-swap-nu1.2": {**_SWAP, "nu": 1.2},
    "swap-nu100": {**_SWAP, "nu": 100},
    "fig2-cphase": dict(_CPHASE),
    "fig2-cphase-minus5": {**_CPHASE, "g1": 0.95, "g2": 1.425, "nu": 95},
    "fig2-cphase-plus5": {**_CPHASE, "g1": 1.05, "g2": 1.575, "nu": 105},
    "cphase-gates": {**_CPHASE, "t_max": 30},
    "fig3-eof-delta0": {**_EOF, "g2": 1.0},
    "fig3-eof-delta0.5": {**_EOF, "g2": 1.5},
    "fig3-eof-delta1": {**_EOF, "g2": 2.0},
    "swap-kappa1e-2": {**_SWAP, "nu": 1.2, "t_max": 4, "kappa": 1e-2},
    "swap-all1e-3": {**_SWAP, "nu": 1.2, "t_max": 4, "kappa": 1e-3, "gamma": 1e-3,
                     "beta": 1e-3},
    "cphase-kappa1e-2": {**_CPHASE, "kappa": 1e-2},
    "cphase-kappa-gamma1e-3": {**_CPHASE, "kappa": 1e-3, "gamma": 1e-3},
}

_PARAM_KEYS = {"g1": "g1", "g2": "g2", "nu": "nu", "Delta": "detuning",
               "detuning": "detuning", "phi": "phi", "kappa": "kappa",
               "gamma": "gamma", "beta": "beta"}
_FLOAT_KEYS = ("t_max", "dt", "theta")
_INT_KEYS = ("seed", "mc_samples")
_NUMBER = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_number(text, key: str = "value", allow_complex: bool = False):
    """Parse a number, accepting a trailing ``pi`` multiplier (``0.15pi``)."""
    if isinstance(text, (int, float, complex)):
        return text
    s = str(text).strip()
    m = _NUMBER.match(s)
    try:
        if m:
            coeff = m.group(1)
            return (float(coeff) if coeff not in ("", "+", "-") else float(coeff + "1")) * math.pi
        if allow_complex and "j" in s:
            return complex(s.replace(" ", ""))
        return float(s)
    except ValueError:
        raise ConfigError(key, f"cannot parse number {text!r}") from None


def config_from_mapping(values: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a config from flat key/value pairs layered over ``base``."""
    base = base or ScenarioConfig()
    values = dict(values)
    if "preset" in values:
        name = values.pop("preset")
        if name not in PRESETS:
            raise ConfigError("preset", f"unknown preset {name!r}")
        base = config_from_mapping(PRESETS[name], base)
    param_updates, cfg_updates = {}, {}
    for key, raw in values.items():
        if raw is None:
            continue
        if key in _PARAM_KEYS:
            param_updates[_PARAM_KEYS[key]] = parse_number(raw, key, key in ("g1", "g2"))
        elif key in _FLOAT_KEYS:
            cfg_updates[key] = float(parse_number(raw, key))
        elif key in _INT_KEYS:
            try:
                cfg_updates[key] = int(raw)
            except ValueError:
                raise ConfigError(key, f"not an integer: {raw!r}") from None
        elif key == "outputs":
            items = raw.split(",") if isinstance(raw, str) else list(raw)
            cfg_updates[key] = tuple(s.strip() for s in items if s.strip())
        elif key in ("target", "initial_state"):
            cfg_updates[key] = str(raw).strip()
        else:
            raise ConfigError(key, "unknown configuration key")
    try:
        params = replace(base.params, **param_updates)
    except ValueError as exc:
        raise ConfigError(next(iter(param_updates), "params"), str(exc)) from None
    return replace(base, params=params, **cfg_updates)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value
    return values


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def preset_config(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}")
    return config_from_mapping(PRESETS[name])


# --------------------------------------------------------------------------- #
# running
# --------------------------------------------------------------------------- #

_UNITS = {"t": "1/g", "leakage": "1", "theta_pi": "pi rad", "entangling_angle_pi": "pi rad",
          "eof": "ebit"}


def _columns(cfg: ScenarioConfig) -> list[str]:
    cols = ["t"]
    tgt = cfg.target
    for name in cfg.outputs:
        if name == "leakage":
            cols.append("leakage")
        elif name == "theta":
            cols += ["theta_pi", "entangling_angle_pi"]
        elif name in ("fidelity_raw", "fidelity_phase_opt", "fidelity_mc"):
            if tgt == "none":
                raise ConfigError("outputs", f"{name} needs a target")
            suffix = {"fidelity_raw": "raw", "fidelity_phase_opt": "opt",
                      "fidelity_mc": "mc"}[name]
            cols.append(f"F_{tgt}_{suffix}")
            if name == "fidelity_mc":
                cols.append(f"F_{tgt}_mc_stderr")
        elif name == "eof":
            cols.append("eof")
        elif name == "populations":
            cols += [f"p{a}{b}" for a, b in ATOMIC_STATES]
    return cols


def _coherence_phase(ch: gates.ChannelMatrix) -> float:
    c = [ch.map[m * 4, m * 4] for m in range(4)]
    return float((np.angle(c[3]) - np.angle(c[2]) - np.angle(c[1])) % (2 * math.pi))


def _closed_states(cfg: ScenarioConfig, times):
    p = cfg.params
    leak = closed_leakage(p, times)
    for t, lk in zip(times, leak):
        ks = kraus_set(p, t)
        yield t, gates.channel_from_kraus(ks), float(lk), ks


def _vacuum_indices():
    space = full_space()
    return [space.index((*a, 0, 0, 0)) * DIM + space.index((*a, 0, 0, 0))
            for a in ATOMIC_STATES]


def _open_states(cfg: ScenarioConfig, times):
    li = build_liouvillian(cfg.params)
    vac = _vacuum_indices()
    diag_inputs = [m * 4 + m for m in range(4)]
    for t, prop_cols, ch in propagated_operator_basis(li, times):
        # field-vacuum population for the maximally mixed atomic input
        vac_pop = prop_cols[np.ix_(vac, diag_inputs)].real.sum() / 4
        yield t, ch, float(1.0 - vac_pop), None


def _target_matrix(cfg: ScenarioConfig) -> np.ndarray:
    return gates.SWAP if cfg.target == "swap" else gates.cphase_matrix(cfg.theta)


def run_scenario(cfg: ScenarioConfig) -> ResultTable:
    """Evaluate the requested observables on the config's time grid."""
    cols = _columns(cfg)
    table = ResultTable(cols, units={c: _UNITS.get(c, "1") for c in cols})
    times = cfg.times()
    states = _open_states(cfg, times) if cfg.params.dissipative else _closed_states(cfg, times)
    psi0 = INITIAL_STATES[cfg.initial_state]
    rho0 = np.outer(psi0, psi0.conj())
    target = None if cfg.target == "none" else _target_matrix(cfg)
    for k, (t, ch, leak, ks) in enumerate(states):
        row = [float(t)]
        for name in cfg.outputs:
            if name == "leakage":
                row.append(leak)
            elif name == "theta":
                try:
                    theta = (gates.extract_controlled_phase(ks).theta if ks is not None
                             else _coherence_phase(ch))
                except gates.PhaseUndefinedError:
                    theta = math.nan
                row += [theta / math.pi, min(theta, 2 * math.pi - theta) / math.pi]
            elif name == "fidelity_raw":
                row.append(gates.average_fidelity(ch, target))
            elif name == "fidelity_phase_opt":
                if cfg.target == "swap":
                    row.append(gates.swap_fidelity_optimized(ch)[0])
                else:
                    row.append(gates.fidelity_local_phase_optimized(ch, cfg.theta)[0])
            elif name == "fidelity_mc":
                row += gates.average_fidelity_monte_carlo(
                    ch, target, cfg.mc_samples, seed=cfg.seed + k)
            elif name == "eof":
                row.append(entanglement_of_formation(ch.apply(rho0)))
            elif name == "populations":
                row += list(np.clip(np.diag(ch.apply(rho0)).real, 0.0, None))
        table.rows.append(tuple(float(x) for x in row))
    return table


AXES = tuple(f.name for f in fields(SystemParams)) + ("Delta", "all_couplings_scale")


def _with_axis(base: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis not in AXES:
        raise ConfigError("axis", f"unknown sweep axis {axis!r}")
    if axis == "all_couplings_scale":
        return replace(base, params=base.params.scaled_couplings(float(value)))
    return config_from_mapping({axis: value}, base)


def sweep(base: ScenarioConfig, axis: str, values, workers: int = 1) -> dict:
    """Independent runs along one axis, keyed by value in input order."""
    configs = [_with_axis(base, axis, v) for v in values]
    if workers > 1 and len(configs) > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            tables = list(pool.map(run_scenario, configs))
    else:
        tables = [run_scenario(c) for c in configs]
    return dict(zip(values, tables))


def emit_csv(table: ResultTable, path, footer: list[str] | None = None) -> None:
    """Write ``table`` with a units comment line and shortest round-trip floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(table, fh, footer)


def write_csv(table: ResultTable, fh, footer: list[str] | None = None) -> None:
    units = ",".join(f"{c}[{table.units.get(c, '1')}]" for c in table.columns)
    fh.write(f"# units: {units}\n")
    for line in table.comments:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([repr(float(x)) for x in row])
    for line in footer or ():
        fh.write(f"# {line}\n")


def read_csv(path) -> ResultTable:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    return ResultTable(cols, [tuple(float(x) for x in r) for r in reader])
