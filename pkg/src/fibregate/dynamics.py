"""Closed-system evolution: exact propagators, Kraus operators, decoupling times."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .hilbert import (ATOMIC_STATES, FIELD_OUTCOMES, MAX_EXCITATIONS, BasisState,
                      atomic_index, enumerate_sector, index_of)
from .model import SystemParams, build_hamiltonian


@lru_cache(maxsize=256)
def _eigensystem(params: SystemParams, sector: int):
    w, v = np.linalg.eigh(build_hamiltonian(params, sector).matrix)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@dataclass(frozen=True)
class Propagator:
    time: float
    blocks: tuple[np.ndarray, ...]

    def sector(self, n: int) -> np.ndarray:
        return self.blocks[n]


def propagator(params: SystemParams, t: float) -> Propagator:
    if t == 0:
        return Propagator(0.0, tuple(np.eye(enumerate_sector(n).dim, dtype=complex)
                                     for n in range(MAX_EXCITATIONS + 1)))
    blocks = []
    for n in range(MAX_EXCITATIONS + 1):
        w, v = _eigensystem(params, n)
        blocks.append((v * np.exp(-1j * w * t)) @ v.conj().T)
    return Propagator(float(t), tuple(blocks))


@lru_cache(maxsize=None)
def _kraus_layout():
    """For each outcome, the (row, col, sector, out_idx, in_idx) entries it reads."""
    layout = {}
    for outcome in FIELD_OUTCOMES:
        entries = []
        for c, atoms_in in enumerate(ATOMIC_STATES):
            n = sum(atoms_in)
            basis = enumerate_sector(n)
            col = index_of(basis, (*atoms_in, 0, 0, 0))
            for atoms_out in ATOMIC_STATES:
                if sum(atoms_out) + sum(outcome) != n:
                    continue
                row = index_of(basis, BasisState(*atoms_out, *outcome))
                entries.append((atomic_index(*atoms_out), c, n, row, col))
        layout[outcome] = tuple(entries)
    return layout


@dataclass(frozen=True)
class KrausSet:
    """Atomic Kraus operators E_ijk = <ijk| U(t) |000> indexed by field outcome."""

    time: float
    operators: dict

    def __getitem__(self, outcome) -> np.ndarray:
        return self.operators[tuple(outcome)]

    def __iter__(self):
        return iter(self.operators.values())

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def vacuum(self) -> np.ndarray:
        return self.operators[(0, 0, 0)]

    def completeness(self) -> np.ndarray:
        return sum(e.conj().T @ e for e in self.operators.values())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(e @ rho @ e.conj().T for e in self.operators.values())


def kraus_from_propagator(prop: Propagator) -> KrausSet:
    ops = {}
    for outcome, entries in _kraus_layout().items():
        e = np.zeros((4, 4), dtype=complex)
        for r, c, n, row, col in entries:
            e[r, c] = prop.blocks[n][row, col]
        ops[outcome] = e
    return KrausSet(prop.time, ops)


def kraus_set(params: SystemParams, t: float) -> KrausSet:
    return kraus_from_propagator(propagator(params, t))


def vacuum_kraus(params: SystemParams, times) -> np.ndarray:
    """E_000 on a batch of times, shape (len(times), 4, 4).

    E_000 is diagonal apart from the single-excitation block, so only the
    atomic rows/columns of each sector are needed.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((times.size, 4, 4), dtype=complex)
    for n in range(MAX_EXCITATIONS + 1):
        basis = enumerate_sector(n)
        atoms = [a for a in ATOMIC_STATES if sum(a) == n]
        pos = [index_of(basis, (*a, 0, 0, 0)) for a in atoms]
        ai = [atomic_index(*a) for a in atoms]
        w, v = _eigensystem(params, n)
        vs = v[pos, :]
        phases = np.exp(-1j * np.outer(times, w))
        block = np.einsum("rk,tk,ck->trc", vs, phases, vs.conj())
        out[np.ix_(np.arange(times.size), ai, ai)] = block
    return out


def leakage(params: SystemParams, t) -> np.ndarray | float:
    """Input-averaged probability that the field is left excited, ``1 - Tr(E000^dag E000)/4``."""
    e = vacuum_kraus(params, t)
    value = 1.0 - np.einsum("tij,tij->t", e.conj(), e).real / 4.0
    return float(value[0]) if np.ndim(t) == 0 else value


def worst_case_leakage(params: SystemParams, t: float) -> float:
    """Leakage for the worst pure input (diagnostic only)."""
    e = vacuum_kraus(params, t)[0]
    return float(1.0 - np.linalg.eigvalsh(e.conj().T @ e).min())


def find_decoupling_times(params: SystemParams, t_max: float, dt: float = 0.01,
                          max_leakage: float | None = None) -> list[tuple[float, float]]:
    """Local minima of the leakage on ``(0, t_max]``.

    The leakage is scanned on a grid of spacing ``dt`` and each interior grid
    minimum is refined by golden-section search to about ``dt * 1e-3``.
    Minima deeper than ``max_leakage`` are dropped when a threshold is given.
    """
    if not 0 < dt < t_max:
        raise ValueError("need 0 < dt < t_max")
    grid = np.arange(1, int(np.floor(t_max / dt + 1e-9)) + 1) * dt
    values = leakage(params, grid)
    found = []
    for i in range(1, grid.size - 1):
        if not (values[i] < values[i - 1] and values[i] <= values[i + 1]):
            continue
        res = minimize_scalar(lambda t: leakage(params, t), method="golden",
                              bracket=(grid[i - 1], grid[i], grid[i + 1]),
                              tol=1e-3 * dt / grid[i])
        t_min, l_min = float(res.x), float(res.fun)
        if l_min > values[i]:
            t_min, l_min = float(grid[i]), float(values[i])
        if max_leakage is None or l_min <= max_leakage:
            found.append((t_min, l_min))
    return sorted(found)
