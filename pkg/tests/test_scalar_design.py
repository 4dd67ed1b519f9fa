import math

import numpy as np
import pytest

from reconfigkf import oracles, scalar_design as sd
from reconfigkf.errors import ConfigurationError, SolverError
from reconfigkf.kalman import update_mse_scalar

from conftest import random_hermitian_pd, random_complex


def power_of(a, g):
    return float(np.real(a.conj() @ (g.conj().T @ g) @ a))


def test_minsum_closed_form_case():
    # G = I2, M = diag(2, 1), sigma^2 = 1, P = 1: optimum observes e_1,
    # sum MSE = 2/(1+2*... ) -> 5/3
    sol = sd.minsum_scalar(np.diag([2.0, 1.0]).astype(complex),
                           np.eye(2, dtype=complex), 1.0, 1.0)
    assert sol.achieved_sum_mse == pytest.approx(5.0 / 3.0, abs=1e-6)
    assert power_of(sol.a_star, np.eye(2)) == pytest.approx(1.0, rel=1e-10)


def test_minsum_matches_grid_oracle():
    m2 = np.diag([2.0, 1.0]).astype(complex)
    g2 = np.eye(2, dtype=complex)
    sol = sd.minsum_scalar(m2, g2, 1.0, 1.0)
    ref = oracles.scalar_minsum_grid_2d(m2, g2, 1.0, 1.0)
    assert sol.achieved_sum_mse == pytest.approx(ref, abs=1e-6)


def test_minsum_matches_projected_gradient(rng):
    for _ in range(5):
        m_pred = random_hermitian_pd(rng, 4)
        g = random_complex(rng, 4, 3)
        p = float(rng.uniform(0.3, 4.0))
        sol = sd.minsum_scalar(m_pred, g, 0.5, p)
        ref = oracles.scalar_minsum_projected_gradient(m_pred, g, 0.5, p)
        assert sol.achieved_sum_mse <= ref * (1 + 1e-3)
        assert power_of(sol.a_star, g) == pytest.approx(p, rel=1e-8)


def test_minsum_requires_positive_power(rng):
    with pytest.raises(ConfigurationError):
        sd.minsum_scalar(np.eye(2, dtype=complex), np.eye(2, dtype=complex),
                         1.0, 0.0)


def test_build_E_i_monotone_in_t(rng):
    m_pred = random_hermitian_pd(rng, 3)
    g = random_complex(rng, 3, 2)
    e1 = sd.build_E_i(m_pred, g, 1, 0.3)
    e2 = sd.build_E_i(m_pred, g, 1, 0.8)
    diff = e2 - e1
    expected = 0.5 * (g.conj().T @ m_pred @ g)
    assert np.allclose(diff, expected, atol=1e-10)
    assert np.linalg.eigvalsh(diff)[0] >= -1e-10
    with pytest.raises(ConfigurationError):
        sd.build_E_i(m_pred, g, 3, 0.5)


def test_feasibility_monotone(rng):
    m_pred = random_hermitian_pd(rng, 3)
    g = random_complex(rng, 3, 2)
    t_hi = float(np.max(np.real(np.diag(m_pred))))
    ok_hi, a = sd.minmax_feasible(m_pred, g, 0.5, 1.0, t_hi)
    assert ok_hi
    ok_lo, _ = sd.minmax_feasible(m_pred, g, 0.5, 1.0, 0.0)
    assert not ok_lo
    if a is not None:
        assert np.linalg.eigvalsh(a)[0] >= -1e-8


def test_bisection_one_dimensional_closed_form():
    rep = sd.minmax_scalar_bisection(np.array([[1.0 + 0j]]),
                                     np.array([[1.0 + 0j]]), 1.0, 1.0,
                                     eps=1e-6)
    ref = oracles.scalar_minmax_closed_form_1d(1.0, 1.0, 1.0, 1.0)
    assert ref == pytest.approx(0.5)
    assert rep.t_star == pytest.approx(ref, abs=1e-6)
    assert rep.bisection_iters == math.ceil(math.log2(1.0 / 1e-6))
    assert rep.rank_one
    assert rep.achieved_max_mse == pytest.approx(rep.t_star, abs=1e-5)


def test_bisection_iteration_count_scales_with_eps():
    m1 = np.array([[2.0 + 0j]])
    g1 = np.array([[1.0 + 0j]])
    rep = sd.minmax_scalar_bisection(m1, g1, 1.0, 1.0, eps=1e-3)
    assert rep.bisection_iters == math.ceil(math.log2(2.0 / 1e-3))
    with pytest.raises(ConfigurationError):
        sd.minmax_scalar_bisection(m1, g1, 1.0, 1.0, eps=0.0)


def test_bisection_sandwich_and_power(rng):
    for _ in range(3):
        m_pred = random_hermitian_pd(rng, 4)
        g = random_complex(rng, 4, 3)
        p = float(rng.uniform(0.5, 4.0))
        rep = sd.minmax_scalar_bisection(m_pred, g, 0.5, p)
        assert rep.achieved_max_mse >= rep.t_star - 1e-6
        assert rep.achieved_max_mse <= float(np.max(np.real(np.diag(m_pred))))
        assert power_of(rep.a_star, g) == pytest.approx(p, rel=1e-8)
        if rep.rank_one:
            assert rep.achieved_max_mse - rep.t_star <= 1e-5


def test_bisection_warm_bracket_matches_cold(rng):
    m_pred = random_hermitian_pd(rng, 3)
    g = random_complex(rng, 3, 2)
    cold = sd.minmax_scalar_bisection(m_pred, g, 0.5, 1.0)
    warm = sd.minmax_scalar_bisection(
        m_pred, g, 0.5, 1.0,
        bracket=(cold.t_star - 0.01, cold.t_star + 0.01))
    assert warm.t_star == pytest.approx(cold.t_star, abs=1e-5)
    assert warm.bisection_iters < cold.bisection_iters
    # a useless bracket falls back to the full range
    bad = sd.minmax_scalar_bisection(
        m_pred, g, 0.5, 1.0,
        bracket=(cold.t_star + 0.05, cold.t_star + 0.07))
    assert bad.t_star == pytest.approx(cold.t_star, abs=1e-5)


def test_rank_one_reconstruct_exact_rank_one(rng):
    g = random_complex(rng, 4, 3)
    m_pred = random_hermitian_pd(rng, 4)
    a_vec = random_complex(rng, 3, 1).reshape(-1)
    a_vec *= math.sqrt(2.0 / power_of(a_vec, g))
    a_mat = np.outer(a_vec, a_vec.conj())
    a_star, achieved, rank_one = sd.rank_one_reconstruct(
        a_mat, g, 2.0, m_pred, 0.5)
    assert rank_one
    ref = float(np.max(np.real(np.diag(
        update_mse_scalar(m_pred, g @ a_vec, 0.5)))))
    assert achieved == pytest.approx(ref, abs=1e-8)


def test_rank_one_reconstruct_full_rank_randomization(rng):
    g = random_complex(rng, 4, 3)
    m_pred = random_hermitian_pd(rng, 4)
    a_mat = random_hermitian_pd(rng, 3)
    a_star, achieved, rank_one = sd.rank_one_reconstruct(
        a_mat, g, 2.0, m_pred, 0.5, seed=0)
    assert not rank_one
    assert power_of(a_star, g) == pytest.approx(2.0, rel=1e-8)
    assert achieved >= 0
    # deterministic under the same seed
    a2, ach2, _ = sd.rank_one_reconstruct(a_mat, g, 2.0, m_pred, 0.5, seed=0)
    assert np.array_equal(a_star, a2)


def test_rank_one_reconstruct_degenerate(rng):
    g = random_complex(rng, 3, 2)
    with pytest.raises(ConfigurationError):
        sd.rank_one_reconstruct(np.zeros((2, 2)), g, 1.0,
                                np.eye(3, dtype=complex), 0.5)
