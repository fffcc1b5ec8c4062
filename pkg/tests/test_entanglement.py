import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from fibregate.entanglement import (concurrence, eof_from_concurrence, entanglement_of_formation,
                                    reduced_entropy)
from fibregate.gates import cphase_matrix

PHI_PLUS = np.array([1, 0, 0, 1]) / math.sqrt(2)
SYY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence_oracle(rho):
    """Square roots of the (non-Hermitian) product's eigenvalues, diagonalised directly."""
    r = rho @ SYY @ rho.conj() @ SYY
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r).real)))[::-1]
    return max(0.0, lam[0] - lam[1:].sum())


def werner(p):
    return p * np.outer(PHI_PLUS, PHI_PLUS) + (1 - p) * np.eye(4) / 4


def test_bell_state():
    assert concurrence(PHI_PLUS) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_of_formation(PHI_PLUS) == pytest.approx(1.0, abs=1e-12)


def test_product_states(rng):
    for _ in range(10):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
        assert concurrence(psi) == pytest.approx(0.0, abs=1e-7)
        assert entanglement_of_formation(psi) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_werner_states(p):
    expected = max(0.0, (3 * p - 1) / 2)
    assert concurrence_oracle(werner(p)) == pytest.approx(expected, abs=1e-7)
    assert concurrence(werner(p)) == pytest.approx(expected, abs=1e-7)


def test_werner_half():
    assert concurrence(werner(0.5)) == pytest.approx(0.25, abs=1e-10)


def test_random_mixed_states_match_oracle(rng):
    for _ in range(30):
        a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        assert concurrence(rho) == pytest.approx(concurrence_oracle(rho), abs=1e-7)


def test_eof_endpoints_and_monotonicity():
    assert eof_from_concurrence(0.0) == 0.0
    assert eof_from_concurrence(1.0) == pytest.approx(1.0)
    cs = np.linspace(0, 1, 101)
    e = [eof_from_concurrence(c) for c in cs]
    assert np.all(np.diff(e) > 0)


def test_cphase_on_plus_plus():
    theta = 0.93 * math.pi
    psi = cphase_matrix(theta) @ np.full(4, 0.5)
    c = concurrence(psi)
    assert c == pytest.approx(abs(math.sin(theta / 2)), abs=1e-10)
    assert c == pytest.approx(0.994, abs=5e-4)
    assert entanglement_of_formation(psi) == pytest.approx(0.99, abs=0.005)


def test_local_unitary_invariance(rng):
    for _ in range(10):
        a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        u = np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
        assert entanglement_of_formation(u @ rho @ u.conj().T) == pytest.approx(
            entanglement_of_formation(rho), abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_pure_state_eof_is_entropy_of_reduced_state(xs):
    psi = np.array(xs[:4]) + 1j * np.array(xs[4:])
    if np.linalg.norm(psi) < 1e-3:
        return
    psi = psi / np.linalg.norm(psi)
    assert entanglement_of_formation(psi) == pytest.approx(reduced_entropy(psi), abs=1e-6)
