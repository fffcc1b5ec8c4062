"""Dissipative dynamics on the 19-dimensional space and atomic process tomography.

Density matrices are vectorised row-major, so ``A rho B`` becomes
``kron(A, B.T) @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .gates import ChannelMatrix
from .hilbert import ATOMIC_STATES, FIELD_OUTCOMES, full_space, lowering_operator, vacuum_embedding
from .model import SystemParams, full_hamiltonian

DIM = 19
ATOM1, ATOM2, CAV1, FIBRE, CAV2 = range(5)


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 pos_tol: float = 1e-8) -> "DensityMatrix":
        m = self.matrix
        if np.abs(m - m.conj().T).max() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > trace_tol:
            raise ValueError(f"trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -pos_tol:
            raise ValueError("density matrix is not positive")
        return self

    @classmethod
    def from_atomic_state(cls, psi) -> "DensityMatrix":
        """Atomic pure state (length 4) or density matrix (4x4) with the field in vacuum."""
        a = np.asarray(psi, dtype=complex)
        rho_a = np.outer(a, a.conj()) if a.ndim == 1 else a
        emb = vacuum_embedding()
        return cls(emb @ rho_a @ emb.T)


@dataclass(frozen=True)
class Liouvillian:
    generator: np.ndarray
    params: SystemParams

    def jump_operators(self):
        return jump_operators(self.params)


def jump_operators(params: SystemParams):
    """(rate, operator) pairs; rates multiply (1/2) L[o] with L[o] = 2 o.o^dag - {o^dag o, .}."""
    return [
        (params.gamma, lowering_operator(CAV1)),
        (params.gamma, lowering_operator(CAV2)),
        (params.kappa, lowering_operator(ATOM1)),
        (params.kappa, lowering_operator(ATOM2)),
        (params.beta, lowering_operator(FIBRE)),
    ]


def build_liouvillian(params: SystemParams) -> Liouvillian:
    h = full_hamiltonian(params)
    eye = np.eye(DIM)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, o in jump_operators(params):
        if rate == 0:
            continue
        odo = o.T @ o
        gen += 0.5 * rate * (2 * np.kron(o, o) - np.kron(odo, eye) - np.kron(eye, odo.T))
    return Liouvillian(gen, params)


def _check_state(m: np.ndarray, t: float, pos_tol: float = 1e-6) -> DensityMatrix:
    m = 0.5 * (m + m.conj().T)
    if np.linalg.eigvalsh(m).min() < -pos_tol:
        raise IntegrationError(f"positivity lost at t={t:g}")
    return DensityMatrix(m)


def _rk4(gen: np.ndarray, v: np.ndarray, t: float, h: float) -> np.ndarray:
    steps = max(1, int(np.ceil(t / h - 1e-12)))
    h = t / steps
    for _ in range(steps):
        k1 = gen @ v
        k2 = gen @ (v + 0.5 * h * k1)
        k3 = gen @ (v + 0.5 * h * k2)
        k4 = gen @ (v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def rk4_step_bound(li: Liouvillian) -> float:
    """Largest step with ``h * ||generator||_2 <= 0.1``."""
    return 0.1 / np.linalg.norm(li.generator, 2)


def evolve_rk4(li: Liouvillian, rho0: DensityMatrix, t: float,
               step: float | None = None) -> tuple[DensityMatrix, float]:
    """Fixed-step RK4 with a Richardson error estimate from a half-step rerun."""
    h = rk4_step_bound(li) if step is None else step
    v0 = rho0.matrix.reshape(-1)
    coarse = _rk4(li.generator, v0, t, h)
    fine = _rk4(li.generator, v0, t, h / 2)
    err = float(np.abs(fine - coarse).max() / 15)
    return _check_state(fine.reshape(DIM, DIM), t), err


def evolve(li: Liouvillian, rho0: DensityMatrix, t: float, method: str = "exact",
           step: float | None = None) -> DensityMatrix:
    if t < 0:
        raise ValueError("t must be >= 0")
    if method == "exact":
        v = expm(li.generator * t) @ rho0.matrix.reshape(-1)
        return _check_state(v.reshape(DIM, DIM), t)
    if method == "rk4":
        return evolve_rk4(li, rho0, t, step)[0]
    raise ValueError(f"unknown method {method!r}")


def partial_trace_field(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    out = np.zeros((4, 4), dtype=complex)
    for outcome in FIELD_OUTCOMES:
        emb = vacuum_embedding(outcome)
        out += emb.T @ m @ emb
    return out


def _tomography_columns() -> np.ndarray:
    """Column indices of vec(|m><n| (x) |vac><vac|) in row-major order."""
    space = full_space()
    idx = [space.index((*a, 0, 0, 0)) for a in ATOMIC_STATES]
    return np.array([idx[m] * DIM + idx[n] for m in range(4) for n in range(4)])


def _field_trace_matrix() -> np.ndarray:
    """16x361 matrix taking vec(rho) to vec(Tr_field rho)."""
    mat = np.zeros((16, DIM * DIM))
    for outcome in FIELD_OUTCOMES:
        emb = vacuum_embedding(outcome)
        mat += np.kron(emb.T, emb.T)
    return mat


def _channel_from_propagator(prop_cols: np.ndarray, t: float, tol: float) -> ChannelMatrix:
    ch = ChannelMatrix(_field_trace_matrix() @ prop_cols, "dissipative")
    if ch.min_choi_eigenvalue() < -tol:
        raise IntegrationError(f"reconstructed channel is not CP at t={t:g}")
    return ch


def tomography_channel(li: Liouvillian, t: float, tol: float = 1e-6) -> ChannelMatrix:
    """Atomic channel at time ``t``, evolving all 16 operator-basis inputs at once."""
    cols = _tomography_columns()
    prop_cols = expm(li.generator * t)[:, cols]
    return _channel_from_propagator(prop_cols, t, tol)


def propagated_operator_basis(li: Liouvillian, times, tol: float = 1e-6):
    """Yield ``(t, columns, channel)`` along a sorted time grid.

    ``columns`` holds the evolved vec(|m><n| (x) |vac><vac|) as its 16 columns.
    Interval propagators are cached, so uniform grids cost one exponential.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be sorted and non-negative")
    state = np.eye(DIM * DIM, dtype=complex)[:, _tomography_columns()]
    steps: dict[float, np.ndarray] = {}
    t_prev = 0.0
    for t in times:
        gap = round(float(t) - t_prev, 12)
        if gap > 0:
            if gap not in steps:
                steps[gap] = expm(li.generator * gap)
            state = steps[gap] @ state
        yield float(t), state, _channel_from_propagator(state, t, tol)
        t_prev = float(t)


def tomography_channels(li: Liouvillian, times, tol: float = 1e-6) -> list[ChannelMatrix]:
    return [ch for _, _, ch in propagated_operator_basis(li, times, tol)]
