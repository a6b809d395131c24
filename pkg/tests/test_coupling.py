import math

import numpy as np
import pytest

from hawkeslab import (
    HawkesModel,
    MarkDistribution,
    TildeConfig,
    simulate_tilde,
    tilde_mean,
)
from hawkeslab.linalg import mat_exp


def test_tiny_mark_dies_immediately(bench_model):
    cfg = TildeConfig(model=bench_model, component=0, t=0.0, x=1e-12, horizon=10.0)
    for seed in range(5):
        assert simulate_tilde(cfg, seed).n_events == 0


def test_no_excitation_always_empty(poisson_model):
    cfg = TildeConfig(model=poisson_model, component=1, t=0.0, x=1.0, horizon=50.0)
    for seed in range(5):
        p = simulate_tilde(cfg, seed)
        assert p.n_events == 0
        assert np.array_equal(p.int_lambda, [0.0, 0.0])


def test_tilde_mean_initial_condition(bench_model):
    cfg = TildeConfig(model=bench_model, component=0, t=2.0, x=1.0, horizon=10.0)
    assert np.allclose(tilde_mean(cfg, 2.0), bench_model.alpha[:, 0], atol=1e-14)
    cfg3 = TildeConfig(model=bench_model, component=0, t=2.0, x=3.0, horizon=10.0)
    assert np.allclose(tilde_mean(cfg3, 2.0), 3.0 * bench_model.alpha[:, 0])


def test_tilde_mean_matexp_example(bench_model):
    # x=2, one time unit after insertion
    cfg = TildeConfig(model=bench_model, component=0, t=0.0, x=2.0, horizon=10.0)
    expected = 2.0 * mat_exp(bench_model.V(), -1.0) @ np.array([0.5, 2.0])
    assert np.allclose(tilde_mean(cfg, 1.0), expected, rtol=1e-12)


def test_tilde_mean_decays_to_zero(bench_model):
    cfg = TildeConfig(model=bench_model, component=1, t=0.0, x=1.0, horizon=100.0)
    assert np.max(np.abs(tilde_mean(cfg, 60.0))) < 1e-12


def test_tilde_mean_linear_in_x(bench_model):
    c1 = TildeConfig(model=bench_model, component=0, t=0.0, x=1.25, horizon=5.0)
    c2 = TildeConfig(model=bench_model, component=0, t=0.0, x=2.5, horizon=5.0)
    for s in (0.0, 0.3, 2.0):
        assert np.array_equal(tilde_mean(c2, s), 2.0 * tilde_mean(c1, s))


def test_tilde_mean_rejects_past(bench_model):
    cfg = TildeConfig(model=bench_model, component=0, t=1.0, x=1.0, horizon=5.0)
    with pytest.raises(ValueError):
        tilde_mean(cfg, 0.5)


def test_config_validation(bench_model):
    with pytest.raises(ValueError):
        TildeConfig(model=bench_model, component=2, t=0.0, x=1.0, horizon=1.0)
    with pytest.raises(ValueError):
        TildeConfig(model=bench_model, component=0, t=0.0, x=0.0, horizon=1.0)
    with pytest.raises(ValueError):
        TildeConfig(model=bench_model, component=0, t=2.0, x=1.0, horizon=1.0)


def test_mc_mean_matches_closed_form(bench_model):
    # module-scale version of the coupling acceptance check
    cfg = TildeConfig(model=bench_model, component=0, t=0.0, x=1.0, horizon=15.0)
    s_grid = np.array([0.5, 1.0])
    n = 20_000
    acc = np.zeros((2, 2))
    sq = np.zeros((2, 2))
    for i in range(n):
        _, state = simulate_tilde(cfg, 40_000 + i, checkpoints=s_grid)
        acc += state["lambda"]
        sq += state["lambda"] ** 2
    mean = acc / n
    se = np.sqrt(np.maximum(sq / n - mean**2, 0.0) / n)
    theory = np.array([tilde_mean(cfg, s) for s in s_grid])
    assert np.all(np.abs(mean - theory) <= 5 * np.maximum(se, 1e-12))


def test_compensator_identity(bench_model):
    # E[H_end] equals E[int lambda] componentwise (counting compensator)
    cfg = TildeConfig(model=bench_model, component=0, t=0.0, x=1.0, horizon=25.0)
    n = 20_000
    h = np.zeros((n, 2))
    integ = np.zeros((n, 2))
    for i in range(n):
        p = simulate_tilde(cfg, 80_000 + i)
        h[i] = p.H_T
        integ[i] = p.int_lambda
    diff = h - integ
    se = diff.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(diff.mean(axis=0)) <= 4 * se)
    # expected totals: E[H_inf] = V^-1 A[:, j] x, essentially reached by t=25
    expect = np.linalg.solve(bench_model.V(), bench_model.alpha[:, 0])
    se_h = h.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(h.mean(axis=0) - expect) <= 5 * se_h)


def test_gamma_marks_tilde_runs():
    model = HawkesModel.make([1.0, 1.0], [[0.3, 0.4], [0.2, 0.1]], [2.0, 2.0],
                             [MarkDistribution.gamma(0.8, 1.0),
                              MarkDistribution.gamma(2.0, 2.0)])
    cfg = TildeConfig(model=model, component=1, t=1.0, x=2.0, horizon=30.0)
    p = simulate_tilde(cfg, 9)
    assert p.t0 == 1.0
    assert np.all(p.times >= 1.0) and np.all(p.times <= 30.0)
