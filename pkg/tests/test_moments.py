import math

import numpy as np
import pytest
from scipy.integrate import quad

from hawkeslab import (
    HawkesModel,
    IndefiniteMatrixError,
    MarkDistribution,
    ModelValidationError,
    deterministic_remainder,
    gaussian_test_expectation,
    integrated_mean_intensity,
    limit_covariances,
    mean_intensity,
    multimarginal_covariance,
)
from hawkeslab.linalg import cholesky

from conftest import random_stable_model

# Benchmark-model quantities, frozen from exact rational arithmetic
# (2x2 adjugate inverses computed independently of hawkeslab.linalg):
#   lambda_bar = (208/33, 232/33)
#   J          = [[56/33, 32/33], [32/33, 56/33]]
#   C          = diag(416/33, 464/33)
#   Ctilde     = [[161792, 143360], [143360, 171008]] / 3267
LAMBDA_BAR = np.array([208.0, 232.0]) / 33.0
J_EXACT = np.array([[56.0, 32.0], [32.0, 56.0]]) / 33.0
C_EXACT = np.diag([416.0, 464.0]) / 33.0
CTILDE_EXACT = np.array([[161792.0, 143360.0], [143360.0, 171008.0]]) / 3267.0


# -- mean intensity -------------------------------------------------------------


def test_mean_intensity_at_zero_is_mu(bench_model):
    assert np.allclose(mean_intensity(bench_model, 0.0), bench_model.mu,
                       rtol=0, atol=1e-14)


def test_mean_intensity_long_run(bench_model):
    assert np.max(np.abs(mean_intensity(bench_model, 100.0) - LAMBDA_BAR)) <= 1e-8


def test_mean_intensity_poisson(poisson_model):
    for t in (0.0, 0.7, 5.0, 50.0):
        assert np.allclose(mean_intensity(poisson_model, t), poisson_model.mu,
                           atol=1e-12)


def test_mean_intensity_solves_ode(bench_model):
    # d/dt E[lambda_t] = B mu - V E[lambda_t]
    V = bench_model.V()
    Bmu = bench_model.beta * bench_model.mu
    h = 1e-5
    for t in np.linspace(0.05, 5.0, 12):
        dot = (mean_intensity(bench_model, t + h) -
               mean_intensity(bench_model, t - h)) / (2 * h)
        rhs = Bmu - V @ mean_intensity(bench_model, t)
        assert np.max(np.abs(dot - rhs)) <= 1e-5


# -- integrated mean intensity ----------------------------------------------------


def test_integrated_mean_intensity_edges(bench_model, poisson_model):
    assert np.allclose(integrated_mean_intensity(bench_model, 0.0), 0.0, atol=1e-14)
    assert np.allclose(integrated_mean_intensity(poisson_model, 7.5),
                       poisson_model.mu * 7.5, atol=1e-12)


def test_integrated_mean_intensity_matches_quadrature(bench_model):
    T = 40.0
    oracle = np.array([
        quad(lambda s, i=i: mean_intensity(bench_model, s)[i], 0, T, limit=200)[0]
        for i in range(2)
    ])
    val = integrated_mean_intensity(bench_model, T)
    assert np.max(np.abs(val - oracle) / np.abs(oracle)) <= 1e-6


def test_integrated_derivative_is_mean_intensity(bench_model):
    h = 1e-4
    for T in (0.5, 2.0, 10.0):
        dot = (integrated_mean_intensity(bench_model, T + h) -
               integrated_mean_intensity(bench_model, T - h)) / (2 * h)
        assert np.max(np.abs(dot - mean_intensity(bench_model, T))) <= 1e-6


# -- limit covariances ------------------------------------------------------------


def test_limit_covariances_benchmark(bench_model):
    ms = limit_covariances(bench_model)
    assert np.max(np.abs(ms.lambda_bar - LAMBDA_BAR)) <= 1e-12
    assert np.max(np.abs(ms.J - J_EXACT)) <= 1e-12
    assert np.max(np.abs(ms.C - C_EXACT)) <= 1e-12
    assert np.max(np.abs(ms.Ctilde - CTILDE_EXACT)) <= 1e-11
    assert np.max(np.abs(ms.Ctilde - ms.Ctilde.T)) <= 1e-12
    # J is the inverse of I - diag(m) B^-1 A
    m1 = bench_model.mark_mean_vector()
    factor = np.eye(2) - (m1 / bench_model.beta)[:, None] * bench_model.alpha
    assert np.max(np.abs(ms.J @ factor - np.eye(2))) <= 1e-10


def test_limit_covariances_compound_poisson(poisson_model):
    ms = limit_covariances(poisson_model)
    # sigma_j^2 = E[Y^2] mu_j for the compound Poisson reduction
    assert np.allclose(ms.C, np.diag([4.0, 6.0]), atol=1e-12)
    assert np.allclose(ms.J, np.eye(2), atol=1e-14)
    assert np.allclose(ms.Ctilde, ms.C, atol=1e-12)


def test_limit_covariances_univariate_unit_marks():
    # Y == 1 and d=1 reduce to the plain-Hawkes variance mu / (1 - alpha/beta)^3
    model = HawkesModel.make([2.0], [[0.5]], [4.0], MarkDistribution.constant(1.0))
    ms = limit_covariances(model)
    assert abs(ms.Ctilde[0, 0] - 2.0 / (1 - 0.5 / 4.0) ** 3) <= 1e-12


def test_limit_covariances_requires_stability():
    bad = HawkesModel.make([2, 3], [[0.5, 2], [2, 0.5]], [2.4, 2.4],
                           MarkDistribution.exponential(1.0))
    with pytest.raises(ModelValidationError):
        limit_covariances(bad)


@pytest.mark.parametrize("seed", range(6))
def test_ctilde_is_psd(seed):
    model = random_stable_model(np.random.default_rng(seed), 3)
    ms = limit_covariances(model)
    cholesky(ms.Ctilde)  # raises if not PSD


# -- multi-marginal covariance ------------------------------------------------------


def test_multimarginal_p1_equals_C_bitwise(bench_model):
    ms = limit_covariances(bench_model)
    chat = multimarginal_covariance(bench_model, [1.0])
    # same arithmetic expression entry by entry, so equality is exact
    assert np.array_equal(chat, ms.C)


def test_multimarginal_d1_frozen(d1_model):
    chat = multimarginal_covariance(d1_model, [0.5, 1.0])
    lam_bar = 16.0 / 7.0
    expected = 2.0 * lam_bar * np.array([[1.0, math.sqrt(0.5)],
                                         [math.sqrt(0.5), 1.0]])
    assert np.max(np.abs(chat - expected)) <= 1e-12
    cholesky(chat)


def test_multimarginal_block_linear_in_m2():
    base = dict(mu=[2.0], alpha=[[0.5]], beta=[4.0])
    m_const = HawkesModel.make(marks=MarkDistribution.constant(1.0), **base)
    m_exp = HawkesModel.make(marks=MarkDistribution.exponential(1.0), **base)
    v = [0.25, 0.5, 1.0]
    # same mark mean (so same lambda_bar) but m2 doubles from 1 to 2
    assert np.allclose(multimarginal_covariance(m_exp, v),
                       2.0 * multimarginal_covariance(m_const, v), rtol=1e-14)


def test_multimarginal_rejects_bad_grid(bench_model):
    for bad in ([], [0.0, 1.0], [0.5, 0.5], [0.7, 0.6], [0.5, 1.2]):
        with pytest.raises(ValueError):
            multimarginal_covariance(bench_model, bad)


# -- Gaussian test-function expectation ----------------------------------------------


def test_gaussian_test_expectation_zero():
    assert gaussian_test_expectation(np.zeros((3, 3))) == 1.0


def test_gaussian_test_expectation_1d_quadrature():
    # E[exp(-x^2/4)] under N(0, 2), against direct quadrature
    oracle, _ = quad(
        lambda x: math.exp(-x * x / 4.0)
        * math.exp(-x * x / 4.0) / math.sqrt(2 * math.pi * 2.0),
        -np.inf, np.inf,
    )
    val = gaussian_test_expectation(np.array([[2.0]]))
    assert abs(val - 1.0 / math.sqrt(2.0)) <= 1e-12
    assert abs(val - oracle) <= 1e-10


def test_gaussian_test_expectation_benchmark_value(bench_model):
    # det(I + Ctilde/2)^(-1/2), frozen from exact rational arithmetic
    val = gaussian_test_expectation(CTILDE_EXACT)
    assert abs(val - 0.06763509454331981) <= 1e-12


def test_gaussian_test_expectation_rejects_indefinite():
    with pytest.raises(IndefiniteMatrixError):
        gaussian_test_expectation([[1.0, 2.0], [2.0, 1.0]])


# -- deterministic centering remainder -------------------------------------------------


def test_deterministic_remainder_closed_form(bench_model):
    T = 250.0
    lam_bar = LAMBDA_BAR
    rp = deterministic_remainder(bench_model, T)
    direct = (integrated_mean_intensity(bench_model, T) - lam_bar * T) / math.sqrt(T)
    assert np.allclose(rp, direct, rtol=1e-12)
    # exp(-VT) is long gone: remainder scales exactly like 1/sqrt(T)
    rp4 = deterministic_remainder(bench_model, 4 * T)
    assert np.allclose(rp4, rp / 2.0, rtol=1e-9)
