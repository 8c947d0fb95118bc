"""Equality-constrained weighted solvers against LP/SOCP oracles."""

import numpy as np
import pytest

import oracles
from statdim import solvers
from statdim.errors import DomainError
from statdim.models import BlockStructure, dct_dictionary
from statdim.solvers import (
    is_success,
    solve_weighted_analysis,
    solve_weighted_block,
    solve_weighted_tv,
)


def _sparse_vector(rng, n, s):
    x = np.zeros(n)
    idx = rng.choice(n, s, replace=False)
    x[idx] = rng.standard_normal(s)
    return x


# ---- weighted l1 analysis -----------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_identity_analysis_matches_lp(seed):
    rng = np.random.default_rng(seed)
    n, m = 24, 16
    A = rng.standard_normal((m, n))
    y = A @ _sparse_vector(rng, n, 4)
    w = rng.uniform(0.3, 1.8, n)
    res = solve_weighted_analysis(A, y, np.eye(n), w)
    assert res.converged
    ref = oracles.lp_weighted_analysis(A, y, np.eye(n), w)
    np.testing.assert_allclose(res.x_hat, ref, atol=2e-4)
    assert np.allclose(A @ res.x_hat, y, atol=1e-6)


def test_redundant_dct_analysis_matches_lp():
    rng = np.random.default_rng(5)
    n, p, m = 16, 24, 12
    Om = dct_dictionary(p, n).matrix
    A = rng.standard_normal((m, n))
    y = A @ rng.standard_normal(n)
    w = rng.uniform(0.5, 1.5, p)
    res = solve_weighted_analysis(A, y, Om, w)
    assert res.converged
    ref = oracles.lp_weighted_analysis(A, y, Om, w)
    # compare objectives rather than minimizers (the LP may sit on a face)
    got = float(w @ np.abs(Om @ res.x_hat))
    want = float(w @ np.abs(Om @ ref))
    assert got == pytest.approx(want, rel=1e-5, abs=1e-6)
    np.testing.assert_allclose(A @ res.x_hat, y, atol=1e-6)


def test_exact_recovery_with_ample_measurements():
    rng = np.random.default_rng(7)
    n, m, s = 30, 26, 3
    x = _sparse_vector(rng, n, s)
    A = rng.standard_normal((m, n))
    res = solve_weighted_analysis(A, A @ x, np.eye(n), np.ones(n))
    assert res.converged
    assert is_success(res.x_hat, x)


def test_huge_weight_acts_as_constraint():
    # a 1e6 weight on a coordinate pins it to (numerically) zero, matching
    # the LP solved with the same weights; this is what the harness relies
    # on when capping infinite weights
    rng = np.random.default_rng(11)
    n, m = 18, 14
    x = _sparse_vector(rng, n, 3)
    A = rng.standard_normal((m, n))
    y = A @ x
    w = np.ones(n)
    dead = [0, 5, 9]
    assert not set(dead) & set(np.flatnonzero(x))
    w[dead] = 1e6
    res = solve_weighted_analysis(A, y, np.eye(n), w)
    assert res.converged
    assert np.abs(res.x_hat[dead]).max() < 1e-6
    ref = oracles.lp_weighted_analysis(A, y, np.eye(n), w)
    np.testing.assert_allclose(res.x_hat, ref, atol=2e-4)


# ---- weighted block -------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 3])
def test_block_matches_socp(seed):
    rng = np.random.default_rng(seed)
    n, q = 40, 8
    k = n // q
    blocks = BlockStructure.from_block_count(n, q)
    x = np.zeros(n)
    for b in (1, 4):
        x[b * k : (b + 1) * k] = rng.standard_normal(k)
    m = 30
    A = rng.standard_normal((m, n))
    y = A @ x
    w = rng.uniform(0.4, 1.5, q)
    res = solve_weighted_block(A, y, blocks, w)
    assert res.converged
    ref = oracles.socp_weighted_block(A, y, k, w)
    np.testing.assert_allclose(res.x_hat, ref, atol=5e-4)


def test_block_exact_recovery():
    rng = np.random.default_rng(4)
    n, q = 40, 8
    blocks = BlockStructure.from_block_count(n, q)
    x = np.zeros(n)
    x[0:5] = rng.standard_normal(5)
    A = rng.standard_normal((32, n))
    res = solve_weighted_block(A, A @ x, blocks, np.ones(q))
    assert res.converged and is_success(res.x_hat, x)


# ---- weighted tv -----------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 8])
def test_tv_matches_lp(seed):
    rng = np.random.default_rng(seed)
    n, m = 20, 15
    x = np.cumsum(_sparse_vector(rng, n, 3))  # piecewise constant
    A = rng.standard_normal((m, n))
    y = A @ x
    w = rng.uniform(0.4, 1.6, n - 1)
    res = solve_weighted_tv(A, y, n, w)
    assert res.converged
    ref = oracles.lp_weighted_tv(A, y, w)
    np.testing.assert_allclose(res.x_hat, ref, atol=5e-4)


def test_tv_exact_recovery():
    rng = np.random.default_rng(2)
    n = 20
    x = np.cumsum(_sparse_vector(rng, n, 2))
    A = rng.standard_normal((14, n))
    res = solve_weighted_tv(A, A @ x, n, np.ones(n - 1))
    assert res.converged and is_success(res.x_hat, x)


# ---- convergence reporting and validation ----------------------------------------


def test_iteration_cap_reports_unconverged():
    rng = np.random.default_rng(13)
    n, m = 24, 12
    A = rng.standard_normal((m, n))
    y = A @ _sparse_vector(rng, n, 6)
    res = solve_weighted_analysis(A, y, np.eye(n), np.ones(n), max_iter=3)
    assert not res.converged
    assert res.iterations == 3


def test_more_rows_than_columns_rejected():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 20))
    with pytest.raises(DomainError):
        solve_weighted_analysis(A, np.zeros(30), np.eye(20), np.ones(20))


def test_nonfinite_weights_rejected():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((10, 20))
    w = np.ones(20)
    w[3] = np.inf
    with pytest.raises(DomainError):
        solve_weighted_analysis(A, np.zeros(10), np.eye(20), w)


def test_shape_mismatch_rejected():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((10, 20))
    with pytest.raises(DomainError):
        solve_weighted_analysis(A, np.zeros(9), np.eye(20), np.ones(20))
    with pytest.raises(DomainError):
        solve_weighted_tv(A, np.zeros(10), 20, np.ones(20))  # w must be n-1


def test_is_success_relative_and_absolute():
    x = np.ones(10)
    assert is_success(x + 1e-5, x, rel_tol=1e-3)
    assert not is_success(x + 1e-2, x, rel_tol=1e-3)
    # zero signal falls back to the absolute tolerance
    z = np.zeros(10)
    assert is_success(z + 1e-8, z)
    assert not is_success(z + 1e-3, z)
