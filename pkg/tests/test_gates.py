import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from fibregate import gates
from fibregate.dynamics import KrausSet, find_decoupling_times, kraus_set
from fibregate.gates import (SWAP, ChannelError, ChannelMatrix, GateTarget, PhaseUndefinedError,
                             average_fidelity, average_fidelity_monte_carlo, channel_from_kraus,
                             depolarizing_channel, extract_controlled_phase,
                             fidelity_local_phase_optimized, local_phase_diag,
                             swap_fidelity_optimized, unitary_channel)
from conftest import random_params


def random_kraus(rng, rank=4):
    """Kraus operators from a Haar-random isometry C^4 -> C^4 (x) C^rank."""
    v = unitary_group.rvs(4 * rank, random_state=rng)[:, :4]
    return [v[k::rank, :] for k in range(rank)]


def random_channel(rng, rank=4):
    return channel_from_kraus(random_kraus(rng, rank))


def test_targets():
    assert np.allclose(GateTarget.swap().matrix @ SWAP, np.eye(4))
    cp = GateTarget.cphase(0.3)
    assert np.allclose(cp.matrix, np.diag([1, 1, 1, np.exp(0.3j)]))
    for t in (GateTarget.swap(), cp):
        assert np.abs(t.matrix.conj().T @ t.matrix - np.eye(4)).max() <= 1e-12


def test_channel_from_kraus_at_zero(rng):
    ch = channel_from_kraus(kraus_set(random_params(rng), 0.0))
    assert np.allclose(ch.map, np.eye(16))


def test_unitary_kraus_is_conjugation(rng):
    u = unitary_group.rvs(4, random_state=rng)
    ch = channel_from_kraus([u])
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert np.allclose(ch.apply(rho), u @ rho @ u.conj().T)


def test_channel_application_matches_kraus_sum(rng):
    ops = random_kraus(rng)
    ch = channel_from_kraus(ops)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(ch.apply(a), sum(e @ a @ e.conj().T for e in ops))


def test_completeness_violation_raises(rng):
    ops = random_kraus(rng)
    ops[0] = ops[0] * 1.1
    with pytest.raises(ChannelError):
        channel_from_kraus(ops)


def test_random_channels_are_cp_and_tp(rng):
    for _ in range(20):
        ch = random_channel(rng, rank=int(rng.integers(1, 6)))
        assert ch.min_choi_eigenvalue() >= -1e-8
        assert ch.trace_defect() <= 1e-8


def test_identical_unitary_gives_unit_fidelity(rng):
    u = unitary_group.rvs(4, random_state=rng)
    assert average_fidelity(unitary_channel(u), u) == pytest.approx(1.0, abs=1e-12)
    f, err = average_fidelity_monte_carlo(unitary_channel(u), u, samples=500, seed=3)
    assert f == pytest.approx(1.0, abs=1e-12)
    assert err == pytest.approx(0.0, abs=1e-12)


def test_depolarizing_fidelity(rng):
    dep = depolarizing_channel()
    for _ in range(5):
        u = unitary_group.rvs(4, random_state=rng)
        assert average_fidelity(dep, u) == pytest.approx(0.25, abs=1e-12)
    f, _ = average_fidelity_monte_carlo(dep, SWAP, samples=100_000, seed=1)
    assert f == pytest.approx(0.25, abs=0.005)


def test_closed_form_matches_monte_carlo(rng):
    for k in range(20):
        ch = random_channel(rng, rank=int(rng.integers(1, 5)))
        u = unitary_group.rvs(4, random_state=rng)
        f = average_fidelity(ch, u)
        est, err = average_fidelity_monte_carlo(ch, u, samples=4000, seed=k)
        assert abs(f - est) <= 3 * err


def test_monte_carlo_is_deterministic():
    ch = depolarizing_channel()
    a = average_fidelity_monte_carlo(ch, SWAP, samples=200, seed=9)
    assert a == average_fidelity_monte_carlo(ch, SWAP, samples=200, seed=9)
    with pytest.raises(ValueError):
        average_fidelity_monte_carlo(ch, SWAP, samples=10)


def test_global_phase_invariance(rng):
    ops = random_kraus(rng)
    u = unitary_group.rvs(4, random_state=rng)
    f0 = average_fidelity(channel_from_kraus(ops), u)
    f1 = average_fidelity(channel_from_kraus([np.exp(0.77j) * e for e in ops]), u)
    assert f0 == pytest.approx(f1, abs=1e-12)


def test_unitary_fidelity_symmetry(rng):
    u, v = unitary_group.rvs(4, size=2, random_state=rng)
    assert average_fidelity(unitary_channel(u), v) == pytest.approx(
        average_fidelity(unitary_channel(v), u), abs=1e-12)


def test_extract_exact_cphase():
    res = extract_controlled_phase(gates.cphase_matrix(0.7))
    assert res.theta == pytest.approx(0.7)
    assert (res.theta1, res.theta2, res.diag_dominance) == pytest.approx((0, 0, 1))
    res = extract_controlled_phase(local_phase_diag(0.4, 1.1, 2.0) * np.exp(0.3j))
    assert (res.theta, res.theta1, res.theta2) == pytest.approx((2.0, 0.4, 1.1))


def test_extract_rejects_vanishing_diagonal():
    with pytest.raises(PhaseUndefinedError):
        extract_controlled_phase(SWAP)


def test_theta_is_local_phase_invariant(cphase_params, rng):
    ks = kraus_set(cphase_params, 4.5)
    ref = extract_controlled_phase(ks).theta
    for _ in range(10):
        pre = local_phase_diag(*rng.uniform(0, 2 * math.pi, 2))
        post = local_phase_diag(*rng.uniform(0, 2 * math.pi, 2))
        dressed = KrausSet(ks.time, {o: post @ e @ pre for o, e in ks.operators.items()})
        assert extract_controlled_phase(dressed).theta == pytest.approx(ref, abs=1e-10)


def test_phase_optimisation_recovers_local_phases(rng):
    for _ in range(10):
        a, b, th = rng.uniform(0, 2 * math.pi, 3)
        ch = unitary_channel(local_phase_diag(a, b, th))
        f, ta, tb = fidelity_local_phase_optimized(ch, th, initial=(0.0, 0.0))
        assert f == pytest.approx(1.0, abs=1e-12)
        assert (ta, tb) == pytest.approx((a, b), abs=1e-6)


def test_swap_optimisation_bounds_raw(swap_params, rng):
    for t in (1.0, 2.5, 3.28, 4.4):
        ch = channel_from_kraus(kraus_set(swap_params, t))
        assert swap_fidelity_optimized(ch)[0] >= average_fidelity(ch, SWAP) - 1e-12
    ch = unitary_channel(SWAP @ local_phase_diag(0.3, 1.9))
    assert average_fidelity(ch, SWAP) < 0.9
    assert swap_fidelity_optimized(ch)[0] == pytest.approx(1.0, abs=1e-12)


def test_optimizer_matches_brute_force_grid(cphase_params):
    ch = channel_from_kraus(kraus_set(cphase_params, 4.52))
    theta = -0.15 * math.pi
    f_opt = fidelity_local_phase_optimized(ch, theta)[0]
    grid = np.linspace(0, 2 * math.pi, 121)
    brute = max(average_fidelity(ch, local_phase_diag(a, b, theta)) for a in grid for b in grid)
    assert f_opt >= brute - 1e-12
    assert f_opt - brute < 1e-3


def test_swap_fidelity_at_pi(swap_params):
    (t0, _), *_ = find_decoupling_times(swap_params, 5.0, 0.01)
    for t in (math.pi, t0):
        ch = channel_from_kraus(kraus_set(swap_params, t))
        assert swap_fidelity_optimized(ch)[0] > 0.97
    assert swap_fidelity_optimized(channel_from_kraus(kraus_set(swap_params, t0)))[0] > 0.99


def test_non_trace_preserving_fidelity_formula(rng):
    # a trace-decreasing map: keep only the no-jump part of a random channel
    ops = random_kraus(rng, 3)[:2]
    ch = ChannelMatrix(sum(np.kron(e, e.conj()) for e in ops), "dissipative")
    u = unitary_group.rvs(4, random_state=rng)
    est, err = average_fidelity_monte_carlo(ch, u, samples=20_000, seed=4)
    assert abs(average_fidelity(ch, u) - est) <= 3 * err
