import numpy as np
import pytest

from hawkeslab import HawkesModel, MarkDistribution


@pytest.fixture(scope="session")
def bench_model():
    """Bivariate benchmark model: A=[[.5,2],[2,.5]], beta=4, mu=(2,3), Exp(1)."""
    return HawkesModel.make(
        mu=[2.0, 3.0],
        alpha=[[0.5, 2.0], [2.0, 0.5]],
        beta=[4.0, 4.0],
        marks=MarkDistribution.exponential(1.0),
    )


@pytest.fixture(scope="session")
def beta6_model():
    """Same excitation and baseline with faster decay beta=6."""
    return HawkesModel.make(
        mu=[2.0, 3.0],
        alpha=[[0.5, 2.0], [2.0, 0.5]],
        beta=[6.0, 6.0],
        marks=MarkDistribution.exponential(1.0),
    )


@pytest.fixture(scope="session")
def d1_model():
    """First component of the benchmark model on its own."""
    return HawkesModel.make(
        mu=[2.0], alpha=[[0.5]], beta=[4.0],
        marks=MarkDistribution.exponential(1.0),
    )


@pytest.fixture(scope="session")
def poisson_model():
    """No excitation: two independent Poisson streams with Exp(1) marks."""
    return HawkesModel.make(
        mu=[2.0, 3.0],
        alpha=[[0.0, 0.0], [0.0, 0.0]],
        beta=[4.0, 4.0],
        marks=MarkDistribution.exponential(1.0),
    )


def random_stable_model(rng: np.random.Generator, d: int) -> HawkesModel:
    """A random model scaled to pass the stability assumptions."""
    mu = rng.uniform(0.5, 3.0, d)
    beta = rng.uniform(1.0, 6.0, d)
    alpha = rng.uniform(0.0, 1.0, (d, d))
    kinds = []
    for _ in range(d):
        u = rng.random()
        if u < 0.34:
            kinds.append(MarkDistribution.constant(rng.uniform(0.5, 2.0)))
        elif u < 0.67:
            kinds.append(MarkDistribution.exponential(rng.uniform(0.5, 2.0)))
        else:
            kinds.append(MarkDistribution.gamma(rng.uniform(0.6, 3.0),
                                                rng.uniform(0.5, 2.0)))
    model = HawkesModel.make(mu, alpha, beta, kinds)
    m = model.mark_mean_vector()
    sub = (alpha * m[None, :]) / beta[:, None]
    rho = np.max(np.abs(np.linalg.eigvals(sub)))
    if rho >= 0.85:
        alpha = alpha * (0.7 / rho)
        model = HawkesModel.make(mu, alpha, beta, kinds)
    return model
