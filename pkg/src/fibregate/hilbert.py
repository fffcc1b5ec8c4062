"""Excitation-number-conserving basis for two atoms and three bosonic modes.

Subsystem order is (atom1, atom2, cavity-1 mode, fibre mode, cavity-2 mode).
Only sectors with at most two excitations are ever populated when the field
starts in the vacuum, so the basis is exact rather than a Fock truncation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

MAX_EXCITATIONS = 2
N_MODES = 3
#: computational order of the atomic register, atom 1 is the leading qubit
ATOMIC_STATES = ((0, 0), (0, 1), (1, 0), (1, 1))
#: field outcomes (n_cav1, n_fibre, n_cav2) reachable from the vacuum
FIELD_OUTCOMES = tuple(
    sorted(o for o in itertools.product(range(MAX_EXCITATIONS + 1), repeat=N_MODES)
           if sum(o) <= MAX_EXCITATIONS)
)


class UnsupportedSectorError(ValueError):
    pass


class BasisState(NamedTuple):
    atom1: int
    atom2: int
    n_cav1: int
    n_fibre: int
    n_cav2: int

    @property
    def excitations(self) -> int:
        return sum(self)

    @property
    def photons(self) -> tuple[int, int, int]:
        return (self.n_cav1, self.n_fibre, self.n_cav2)

    @property
    def atoms(self) -> tuple[int, int]:
        return (self.atom1, self.atom2)

    def label(self) -> str:
        return f"|{self.atom1}{self.atom2};{self.n_cav1}{self.n_fibre}{self.n_cav2}>"


@dataclass(frozen=True)
class SectorBasis:
    excitation_count: int
    states: tuple[BasisState, ...]
    _index: dict = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


@lru_cache(maxsize=None)
def enumerate_sector(n: int) -> SectorBasis:
    """All basis states with exactly ``n`` excitations, lexicographically ordered."""
    if n not in range(MAX_EXCITATIONS + 1):
        raise UnsupportedSectorError(
            f"sector {n} not supported (0..{MAX_EXCITATIONS} only)")
    states = tuple(
        BasisState(*s)
        for s in itertools.product(range(2), range(2), *[range(n + 1)] * N_MODES)
        if sum(s) == n
    )
    return SectorBasis(n, states, {s: i for i, s in enumerate(states)})


def index_of(basis: SectorBasis, s) -> int:
    """Position of ``s`` in ``basis``; raises ``KeyError`` if absent."""
    s = BasisState(*s)
    try:
        return basis._index[s]
    except KeyError:
        raise KeyError(
            f"{s.label()} is not in sector {basis.excitation_count}") from None


@dataclass(frozen=True)
class FullSpace:
    """Direct sum of sectors 0, 1 and 2 (dimension 19)."""

    sectors: tuple[SectorBasis, ...]
    offsets: tuple[int, ...]
    states: tuple[BasisState, ...]
    _index: dict = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, s) -> int:
        try:
            return self._index[BasisState(*s)]
        except KeyError:
            raise KeyError(f"{BasisState(*s).label()} is not in the basis") from None

    def sector_slice(self, n: int) -> slice:
        return slice(self.offsets[n], self.offsets[n] + self.sectors[n].dim)


@lru_cache(maxsize=None)
def full_space() -> FullSpace:
    sectors = tuple(enumerate_sector(n) for n in range(MAX_EXCITATIONS + 1))
    offsets = tuple(int(o) for o in np.cumsum([0] + [s.dim for s in sectors[:-1]]))
    states = tuple(itertools.chain.from_iterable(s.states for s in sectors))
    return FullSpace(sectors, offsets, states, {s: i for i, s in enumerate(states)})


def atomic_index(atom1: int, atom2: int) -> int:
    return 2 * atom1 + atom2


@lru_cache(maxsize=None)
def lowering_operator(subsystem: int) -> np.ndarray:
    """Annihilation (or sigma-minus) operator on the 19-dim space.

    ``subsystem`` indexes the BasisState fields: 0, 1 for the atoms and
    2, 3, 4 for cavity 1, fibre, cavity 2. Lowering never leaves the space,
    so no truncation error arises.
    """
    space = full_space()
    op = np.zeros((space.dim, space.dim))
    for col, s in enumerate(space.states):
        n = s[subsystem]
        if n == 0:
            continue
        lowered = list(s)
        lowered[subsystem] -= 1
        op[space.index(lowered), col] = np.sqrt(n)
    op.setflags(write=False)
    return op


@lru_cache(maxsize=None)
def vacuum_embedding(outcome: tuple[int, int, int] = (0, 0, 0)) -> np.ndarray:
    """19x4 isometry-like map |a1 a2> -> |a1 a2; outcome>, zero columns if absent."""
    space = full_space()
    emb = np.zeros((space.dim, 4))
    for a, atoms in enumerate(ATOMIC_STATES):
        s = BasisState(*atoms, *outcome)
        if s.excitations <= MAX_EXCITATIONS:
            emb[space.index(s), a] = 1.0
    emb.setflags(write=False)
    return emb


def excitation_number_operator() -> np.ndarray:
    return np.diag([float(s.excitations) for s in full_space().states])
