"""Smoke tests for the pybind11 bindings (the `_core` extension module)."""

import math

import pytest

import _core


def test_simulate_returns_ordered_marked_events():
    mu = [0.2, 0.1]
    A = [[0.1, 0.0], [0.3, 0.1]]
    events = _core.simulate(mu, A, beta=1.0, horizon=200.0, seed=4)
    assert len(events) > 0
    times = [t for t, _ in events]
    marks = [m for _, m in events]
    assert times == sorted(times)
    assert all(0.0 <= t <= 200.0 for t in times)
    assert set(marks) <= {0, 1}


def test_simulate_is_deterministic_in_the_seed():
    mu = [0.2, 0.1]
    A = [[0.1, 0.0], [0.3, 0.1]]
    a = _core.simulate(mu, A, beta=1.0, horizon=100.0, seed=11)
    b = _core.simulate(mu, A, beta=1.0, horizon=100.0, seed=11)
    c = _core.simulate(mu, A, beta=1.0, horizon=100.0, seed=12)
    assert a == b
    assert a != c


def test_surrogate_loglik_is_finite_and_penalized_by_lambda1():
    mu = [0.3, 0.3]
    A = [[0.2, 0.1], [0.1, 0.2]]
    seqs = [_core.simulate(mu, A, beta=1.0, horizon=50.0, seed=3)]
    base = _core.surrogate_loglik(mu, A, 1.0, seqs, 50.0)
    penalized = _core.surrogate_loglik(mu, A, 1.0, seqs, 50.0, lambda1=1.0)
    assert math.isfinite(base)
    assert penalized == pytest.approx(base - 1.0 * 0.6)


def test_fit_two_phase_recovers_a_strong_edge():
    mu_true = [0.3, 0.05]
    A_true = [[0.0, 0.0], [0.6, 0.0]]
    seqs = [
        _core.simulate(mu_true, A_true, beta=1.0, horizon=400.0, seed=s)
        for s in range(20)
    ]
    mu_hat, A_hat, end_ll = _core.fit_two_phase(seqs, 400.0, d=2, beta=1.0, seed=1)
    assert math.isfinite(end_ll)
    assert A_hat[1][0] > 0.3  # the injected edge dominates
    assert abs(A_hat[0][1]) < 0.2


def test_generate_synthetic_problem_shapes():
    mu, A, seqs = _core.generate_synthetic_problem(
        d=4, horizon=100.0, n_sequences=3, seed=8
    )
    assert len(mu) == 4
    assert A.shape == (4, 4)
    assert len(seqs) == 3
    assert all(0.0 <= m <= 0.1 for m in mu)


def test_h_dag_and_threshold_to_dag():
    acyclic = [[0.0, 0.4], [0.0, 0.0]]
    cyclic = [[0.0, 0.4], [0.1, 0.0]]
    assert _core.h_dag(acyclic) == pytest.approx(0.0, abs=1e-9)
    assert _core.h_dag(cyclic) > 1e-3
    cut, tau = _core.threshold_to_dag(cyclic)
    assert _core.h_dag(cut) <= 1e-8
    assert cut[0][1] == pytest.approx(0.4)
    assert cut[1][0] == 0.0
    assert tau == pytest.approx(0.4)


def test_fisher_exact_matches_symmetry_and_bounds():
    p = _core.fisher_exact(17, 20, 5, 30)
    assert 0.0 < p <= 1.0
    # swapping the cohorts leaves the two-sided p-value unchanged
    assert p == pytest.approx(_core.fisher_exact(5, 30, 17, 20))
    # identical cohorts are maximally unsurprising
    assert _core.fisher_exact(5, 10, 5, 10) == pytest.approx(1.0)
