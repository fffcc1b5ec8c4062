"""Two-qubit concurrence and entanglement of formation."""

from __future__ import annotations

import numpy as np

SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def _density(rho) -> np.ndarray:
    r = np.asarray(rho, dtype=complex)
    if r.ndim == 1:
        r = np.outer(r, r.conj())
    if r.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got shape {r.shape}")
    return 0.5 * (r + r.conj().T)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def concurrence(rho) -> float:
    """Wootters concurrence.

    The square roots of the eigenvalues of rho (sy sy) rho* (sy sy) are taken
    from the Hermitian matrix sqrt(rho) (sy sy) rho* (sy sy) sqrt(rho), which
    has the same spectrum.
    """
    r = _density(rho)
    sr = _psd_sqrt(r)
    flipped = SIGMA_YY @ r.conj() @ SIGMA_YY
    w = np.linalg.eigvalsh(sr @ flipped @ sr)
    # round-off of order eps * max would otherwise enter as sqrt(eps)
    w[w < 1e-13 * max(w.max(), 0.0)] = 0.0
    lam = np.sort(np.sqrt(np.clip(w, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1 + np.sqrt(1 - c * c)))


def entanglement_of_formation(rho) -> float:
    """Entanglement of formation in ebits."""
    return eof_from_concurrence(concurrence(rho))


def reduced_entropy(psi) -> float:
    """Von Neumann entropy (bits) of atom 1 for a pure two-qubit state."""
    m = np.asarray(psi, dtype=complex).reshape(2, 2)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-15]
    return float(-(s * np.log2(s)).sum())
