"""Physical parameters and the rotating-frame Hamiltonian.

All rates are in units of a reference coupling (normally ``|g1|``) and the
frame rotates at the common cavity frequency, so that frequency never shows
up numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import MAX_EXCITATIONS, enumerate_sector, full_space, index_of

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SystemParams:
    """Couplings, detuning and decay rates of the two-cavity system.

    Parameters
    ----------
    g1, g2 : complex
        Atom-cavity dipole couplings; complex values carry local phases.
    nu : float
        Coupling of each cavity mode to the resonant fibre mode.
    detuning : float
        Detuning of the atom-2 transition from the cavity frequency.
    phi : float
        Propagation phase picked up on the cavity-2 leg of the fibre.
    kappa, gamma, beta : float
        Spontaneous emission, cavity decay and fibre decay rates.
    """

    g1: complex = 1.0
    g2: complex = 1.0
    nu: float = 1.0
    detuning: float = 0.0
    phi: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("nu", "kappa", "gamma", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("g1", "g2", "detuning", "phi"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def g(self) -> float:
        return abs(self.g1)

    @property
    def delta(self) -> float:
        """Coupling mismatch ``|g2| - |g1|``."""
        return abs(self.g2) - abs(self.g1)

    @property
    def dissipative(self) -> bool:
        return self.kappa > 0 or self.gamma > 0 or self.beta > 0

    def closed(self) -> "SystemParams":
        return replace(self, kappa=0.0, gamma=0.0, beta=0.0)

    def scaled_couplings(self, factor: float) -> "SystemParams":
        return replace(self, g1=self.g1 * factor, g2=self.g2 * factor, nu=self.nu * factor)


@dataclass(frozen=True)
class HamiltonianBlock:
    sector: int
    matrix: np.ndarray


def _hopping(params: SystemParams, state):
    """Yield (target, amplitude) for every raising move out of ``state``.

    Each move is one term of sum_j g_j a_j^dag sigma_j + nu (a1^dag + e^{i phi} a2^dag) b;
    the Hermitian conjugate is added by the caller.
    """
    a1, a2, n1, nb, n2 = state
    if a1:
        yield (0, a2, n1 + 1, nb, n2), params.g1 * math.sqrt(n1 + 1)
    if a2:
        yield (a1, 0, n1, nb, n2 + 1), params.g2 * math.sqrt(n2 + 1)
    if nb:
        yield (a1, a2, n1 + 1, nb - 1, n2), params.nu * math.sqrt(nb * (n1 + 1))
        yield ((a1, a2, n1, nb - 1, n2 + 1),
               params.nu * np.exp(1j * params.phi) * math.sqrt(nb * (n2 + 1)))


def build_hamiltonian(params: SystemParams, sector: int) -> HamiltonianBlock:
    basis = enumerate_sector(sector)
    raising = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, s in enumerate(basis.states):
        for target, amp in _hopping(params, s):
            raising[index_of(basis, target), col] += amp
    h = raising + raising.conj().T
    h[np.diag_indices(basis.dim)] += params.detuning * np.array([s.atom2 for s in basis.states])
    return HamiltonianBlock(sector, h)


def full_hamiltonian(params: SystemParams) -> np.ndarray:
    """Block-diagonal 19x19 Hamiltonian over :func:`full_space`."""
    space = full_space()
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for n in range(MAX_EXCITATIONS + 1):
        sl = space.sector_slice(n)
        h[sl, sl] = build_hamiltonian(params, n).matrix
    return h


def normal_mode_frequencies(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Normal modes of the three coupled bosonic modes.

    Returns
    -------
    freqs : ndarray, shape (3,)
        Rotating-frame frequencies of (c, c_minus, c_plus): ``0, -sqrt2 nu, +sqrt2 nu``.
    transform : ndarray, shape (3, 3)
        Unitary whose rows express c, c_minus, c_plus in terms of (a1, b, a2).
    """
    nu = params.nu
    e = np.exp(-1j * params.phi)
    r2 = math.sqrt(2.0)
    transform = np.array([
        [1 / r2, 0.0, -e / r2],
        [0.5, -1 / r2, e / 2],
        [0.5, 1 / r2, e / 2],
    ], dtype=complex)
    freqs = np.array([0.0, -r2 * nu, r2 * nu])
    return freqs, transform


def mode_coupling_matrix(params: SystemParams) -> np.ndarray:
    """Single-particle hopping matrix of (a1, b, a2), used to check the normal modes."""
    nu = params.nu
    ep = np.exp(1j * params.phi)
    return np.array([
        [0.0, nu, 0.0],
        [nu, 0.0, nu * np.conj(ep)],
        [0.0, nu * ep, 0.0],
    ], dtype=complex)


def _require_positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be > 0, got {v!r}")


def short_fibre_mode_count(length_m: float, nubar: float, c_light: float = SPEED_OF_LIGHT) -> float:
    """Number of fibre modes interacting with the cavities, ``l nubar / (2 pi c)``.

    The single-mode model is appropriate when this is of order one or less.
    """
    _require_positive(length_m=length_m, nubar=nubar, c_light=c_light)
    return length_m * nubar / (2 * math.pi * c_light)


def fibre_coupling_estimate(length_m: float, nubar: float, c_light: float = SPEED_OF_LIGHT) -> float:
    _require_positive(length_m=length_m, nubar=nubar, c_light=c_light)
    return math.sqrt(4 * math.pi * nubar * c_light / length_m)


def lambda_effective_params(h: float, d: float, xi: float) -> tuple[float, float]:
    """Effective coupling and decay of an adiabatically eliminated lambda system."""
    denom = d * d + xi * xi
    if denom <= 0:
        raise ValueError("d and xi cannot both vanish")
    return d * h * h / denom, xi * h * h / denom
