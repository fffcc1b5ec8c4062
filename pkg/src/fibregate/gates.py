"""Gate targets, channel matrices and Haar-averaged gate fidelities.

Channels act on row-major vectorised 4x4 operators, so conjugation by ``E``
is ``kron(E, E.conj())``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import KrausSet

D = 4
TWO_PI = 2 * math.pi
SWAP = np.eye(D)[[0, 2, 1, 3]].astype(complex)


class ChannelError(ValueError):
    pass


class PhaseUndefinedError(ValueError):
    pass


@dataclass(frozen=True)
class GateTarget:
    kind: str
    matrix: np.ndarray
    theta: float = 0.0

    @classmethod
    def swap(cls) -> "GateTarget":
        return cls("swap", SWAP.copy())

    @classmethod
    def cphase(cls, theta: float) -> "GateTarget":
        return cls("cphase", cphase_matrix(theta), float(theta) % TWO_PI)

    @classmethod
    def unitary(cls, u: np.ndarray) -> "GateTarget":
        return cls("unitary", np.asarray(u, dtype=complex))


def local_phase_diag(theta1: float, theta2: float, theta: float = 0.0) -> np.ndarray:
    """Diag(1, e^{i theta1}, e^{i theta2}, e^{i(theta + theta1 + theta2)})."""
    return np.diag(np.exp(1j * np.array([0.0, theta1, theta2, theta + theta1 + theta2])))


def cphase_matrix(theta: float) -> np.ndarray:
    return local_phase_diag(0.0, 0.0, theta)


@dataclass(frozen=True)
class ChannelMatrix:
    map: np.ndarray
    origin: str = "closed"

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.map @ np.asarray(rho).reshape(-1)).reshape(D, D)

    def choi(self) -> np.ndarray:
        """Choi matrix sum_mn |m><n| (x) Lambda(|m><n|)."""
        # map[(r,s),(m,n)] -> choi[(m,r),(n,s)]
        return self.map.reshape(D, D, D, D).transpose(2, 0, 3, 1).reshape(D * D, D * D)

    def trace_defect(self) -> float:
        """Largest deviation from trace preservation over basis inputs."""
        tr = np.einsum("iimn->mn", self.map.reshape(D, D, D, D))
        return float(np.abs(tr - np.eye(D)).max())

    def min_choi_eigenvalue(self) -> float:
        c = self.choi()
        return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min())


def unitary_channel(u: np.ndarray, origin: str = "closed") -> ChannelMatrix:
    u = np.asarray(u, dtype=complex)
    return ChannelMatrix(np.kron(u, u.conj()), origin)


def channel_from_kraus(ks, tol: float = 1e-8) -> ChannelMatrix:
    ops = list(ks)
    defect = np.abs(sum(e.conj().T @ e for e in ops) - np.eye(D)).max()
    if defect > tol:
        raise ChannelError(f"Kraus completeness violated by {defect:.3g}")
    return ChannelMatrix(sum(np.kron(e, e.conj()) for e in ops), "closed")


def depolarizing_channel() -> ChannelMatrix:
    """rho -> Tr(rho) I/4."""
    eye = np.eye(D).reshape(-1)
    return ChannelMatrix(np.outer(eye, eye) / D, "closed")


def _as_matrix(target) -> np.ndarray:
    return target.matrix if isinstance(target, GateTarget) else np.asarray(target, dtype=complex)


def average_fidelity(ch: ChannelMatrix, target) -> float:
    """Haar average of <psi|U^dag Lambda(|psi><psi|) U|psi> over pure inputs.

    Uses F = (Tr[S_U^dag S] + Tr[Lambda(I)]) / (d (d + 1)); the first term is
    d^2 times the entanglement fidelity, and the second reduces to ``d`` for
    trace-preserving maps.
    """
    u = _as_matrix(target)
    overlap = np.vdot(np.kron(u, u.conj()), ch.map).real
    trace_term = np.trace(ch.apply(np.eye(D))).real
    return float((overlap + trace_term) / (D * (D + 1)))


def haar_states(samples: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((samples, D)) + 1j * rng.standard_normal((samples, D))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def average_fidelity_monte_carlo(ch: ChannelMatrix, target, samples: int = 10_000,
                                 seed: int = 0) -> tuple[float, float]:
    """Sampled estimate of :func:`average_fidelity` and its standard error."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    u = _as_matrix(target)
    psi = haar_states(samples, np.random.default_rng(seed))
    rho_in = np.einsum("si,sj->sij", psi, psi.conj()).reshape(samples, -1)
    rho_out = (rho_in @ ch.map.T).reshape(samples, D, D)
    ideal = psi @ u.T
    f = np.einsum("si,sij,sj->s", ideal.conj(), rho_out, ideal).real
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples))


class ControlledPhase(NamedTuple):
    theta: float
    theta1: float
    theta2: float
    diag_dominance: float

    @property
    def entangling_angle(self) -> float:
        """``theta`` folded onto [0, pi]; CPHASE(theta) and CPHASE(-theta) are locally equivalent."""
        return min(self.theta, TWO_PI - self.theta)


def extract_controlled_phase(ks) -> ControlledPhase:
    """Local-phase decomposition of the vacuum Kraus operator's diagonal."""
    e = ks.vacuum if isinstance(ks, KrausSet) else np.asarray(ks)
    diag = np.diag(e)
    if np.abs(diag).min() < 1e-6:
        raise PhaseUndefinedError("a diagonal entry of E_000 vanishes")
    a = np.angle(diag)
    theta1 = (a[1] - a[0]) % TWO_PI
    theta2 = (a[2] - a[0]) % TWO_PI
    theta = (a[3] - a[2] - a[1] + a[0]) % TWO_PI
    norm = np.vdot(e, e).real
    return ControlledPhase(float(theta), float(theta1), float(theta2),
                           float(np.sum(np.abs(diag) ** 2) / norm))


def _guess_local_phases(ch: ChannelMatrix, base: np.ndarray) -> tuple[float, float]:
    # Undo the base gate, then read phases off the coherences Lambda(|m><0|)[m, 0].
    undone = unitary_channel(base.conj().T).map @ ch.map
    coh = [undone[m * D, m * D] for m in (1, 2)]
    return tuple(float(np.angle(c)) if abs(c) > 1e-12 else 0.0 for c in coh)


def optimize_local_phases(ch: ChannelMatrix, theta: float = 0.0, base=None,
                          initial=None, tol: float = 1e-6,
                          max_sweeps: int = 200) -> tuple[float, float, float]:
    """Maximise the fidelity against ``base @ local_phase_diag(t1, t2, theta)``.

    The fidelity is a first-order trigonometric polynomial in each local
    phase separately, so every coordinate step is solved exactly from three
    evaluations. Sweeps stop once neither phase moves by more than ``tol``.
    """
    base = np.eye(D, dtype=complex) if base is None else _as_matrix(base)
    x = list(initial) if initial is not None else list(_guess_local_phases(ch, base))

    def fid(t1, t2):
        return average_fidelity(ch, base @ local_phase_diag(t1, t2, theta))

    for _ in range(max_sweeps):
        moved = 0.0
        for k in range(2):
            def f_at(angle):
                y = list(x)
                y[k] = angle
                return fid(*y)
            f0, f_half, f_pi = f_at(0.0), f_at(math.pi / 2), f_at(math.pi)
            mean = 0.5 * (f0 + f_pi)
            b = complex(0.5 * (f0 - f_pi), mean - f_half)
            if abs(b) < 1e-15:
                continue
            best = (-np.angle(b)) % TWO_PI
            step = abs((best - x[k] + math.pi) % TWO_PI - math.pi)
            moved = max(moved, step)
            x[k] = best
        if moved < tol:
            break
    return fid(*x), x[0] % TWO_PI, x[1] % TWO_PI


def fidelity_local_phase_optimized(ch: ChannelMatrix, theta: float,
                                   initial=None) -> tuple[float, float, float]:
    """Best fidelity against the CPHASE(theta) family dressed with local phase gates."""
    return optimize_local_phases(ch, theta, initial=initial)


def swap_fidelity_optimized(ch: ChannelMatrix) -> tuple[float, float, float]:
    """Best fidelity against SWAP composed with local phase gates."""
    return optimize_local_phases(ch, 0.0, base=SWAP)
