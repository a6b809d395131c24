"""Parallel Monte Carlo harness for the limit-theorem experiments.

One experiment simulates ``n_paths`` independent paths per horizon T,
computes a chosen normalized statistic per path, and aggregates:

* empirical mean and covariance with per-entry standard errors and z-scores
  against the matching theoretical limit covariance,
* optionally the smooth-test-function estimate mean f(sample) against its
  exact Gaussian reference E[f(G)] (the discrepancy diagnostic),
* optionally 2-D histograms of the statistic and of a matched Gaussian
  reference sample on identical bins.

Reproducibility contract: path i of horizon index k always uses the Philox
stream ``stream_key(master_seed, i, DOMAIN_PATHS + k)``, workers write into
disjoint rows of a preallocated table, and aggregation is compensated
summation in fixed index order -- so results are byte-identical no matter
how many threads run the paths.  Wall-clock timings live next to, not
inside, the primary summary for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import linalg, moments
from ._backend import get_kernel
from .errors import RunawayProcessError
from .model import HawkesModel, require_valid
from .rng import DOMAIN_GAUSSIAN, DOMAIN_PATHS, generator, stream_key
from .simulator import DEFAULT_EVENT_CAP, DEATH_THRESHOLD, REFRESH_INTERVAL
from .statistics import batch_covariance, batch_mean, check_v_grid

STATISTICS = ("Yprime", "F", "Y", "Gamma")

_THREADS_ENV = "HAWKES_LAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(_THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class ExperimentConfig:
    model: HawkesModel
    statistic: str
    T_list: tuple[float, ...]
    n_paths: int
    master_seed: int
    v_grid: tuple[float, ...] | None = None
    test_function: dict | None = None
    histogram: dict | None = None
    event_cap: int = DEFAULT_EVENT_CAP

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}")
        if self.statistic == "Gamma":
            if self.v_grid is None:
                raise ValueError("Gamma statistic requires a v_grid")
            object.__setattr__(self, "v_grid",
                               tuple(float(v) for v in check_v_grid(self.v_grid)))
        T_list = tuple(float(t) for t in self.T_list)
        if not T_list or any(t <= 0 for t in T_list):
            raise ValueError("T_list must be nonempty with positive horizons")
        object.__setattr__(self, "T_list", T_list)
        if self.n_paths < 2:
            raise ValueError("n_paths must be at least 2")
        if self.test_function is not None:
            tf = dict(self.test_function)
            if tf.get("kind") != "exp_quadratic":
                raise ValueError("test_function kind must be 'exp_quadratic'")
            tf.setdefault("scale", 0.25)
            if not tf["scale"] > 0:
                raise ValueError("test_function scale must be positive")
            object.__setattr__(self, "test_function", tf)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "statistic": self.statistic,
            "T_list": list(self.T_list),
            "n_paths": self.n_paths,
            "master_seed": self.master_seed,
            "v_grid": None if self.v_grid is None else list(self.v_grid),
            "test_function": self.test_function,
            "histogram": self.histogram,
            "event_cap": self.event_cap,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ExperimentSummary:
    records: list[dict]
    provenance: dict
    histograms: dict = field(default_factory=dict)   # T -> grids (CSV-bound)
    timings: dict = field(default_factory=dict)      # volatile; sidecar only

    def to_dict(self) -> dict:
        return {"records": self.records, "provenance": self.provenance}

    def to_json(self) -> str:
        """Primary output bytes; deliberately excludes wall-clock timings."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def sample_gaussian(Sigma, n: int, seed: int) -> np.ndarray:
    """n draws of N(0, Sigma) via Cholesky and inverse-CDF normals.

    Uniforms come from the Philox stream ``stream_key(seed, 0,
    DOMAIN_GAUSSIAN)``; exact zeros (probability 2^-53 each) are nudged to
    the smallest positive double, where ndtri is still finite.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ValueError("Sigma must be square")
    if not Sigma.any():  # degenerate point mass at the origin
        return np.zeros((n, Sigma.shape[0]))
    Lch = linalg.cholesky(Sigma)
    gen = generator(stream_key(seed, 0, DOMAIN_GAUSSIAN))
    u = gen.random((n, Sigma.shape[0]))
    u[u == 0.0] = 5e-324
    return ndtri(u) @ Lch.T


def histogram2d(samples, bins, hist_range):
    """Counts grid for 2-D samples; returns (counts, x_edges, y_edges)."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError("histogram2d requires samples of dimension 2")
    counts, xe, ye = np.histogram2d(samples[:, 0], samples[:, 1],
                                    bins=bins, range=hist_range)
    return counts, xe, ye


# -- statistic evaluation -----------------------------------------------------


class _StatPlan:
    """Per-horizon precomputation shared by all paths."""

    def __init__(self, cfg: ExperimentConfig, T: float):
        model = cfg.model
        self.T = T
        self.sqrtT = math.sqrt(T)
        self.m1 = model.mark_mean_vector()
        ms = moments.limit_covariances(model)
        self.statistic = cfg.statistic
        if cfg.statistic == "Yprime":
            self.center = self.m1 * ms.lambda_bar * T
            self.sigma = ms.Ctilde
        elif cfg.statistic == "Y":
            self.center = self.m1 * moments.integrated_mean_intensity(model, T)
            self.sigma = ms.Ctilde
        elif cfg.statistic == "F":
            self.center = None
            self.sigma = ms.C
        else:
            self.center = None
            self.sigma = moments.multimarginal_covariance(model, cfg.v_grid)
        if cfg.statistic == "Gamma":
            self.v = np.asarray(cfg.v_grid)
            self.checkpoints = self.v * T
            self.sqrt_s = np.sqrt(self.checkpoints)
            self.dim = self.v.size * model.d
        else:
            self.v = None
            self.checkpoints = None
            self.dim = model.d
        self.remainder = (
            moments.deterministic_remainder(model, T).tolist()
            if cfg.statistic in ("Yprime", "Y") else None
        )

    def evaluate(self, out: dict) -> np.ndarray:
        if self.statistic == "F":
            return (out["L"] - self.m1 * out["int_lambda"]) / self.sqrtT
        if self.statistic in ("Yprime", "Y"):
            return (out["L"] - self.center) / self.sqrtT
        p = self.v.size
        g = np.empty(self.dim)
        for q in range(p):
            g[q::p] = (out["ck_L"][q] - self.m1 * out["ck_int"][q]) / self.sqrt_s[q]
        return g


def _simulate_block(kernel, args, cfg, plan, domain, lo, hi, table):
    mu, alpha, beta, codes, p1, p2 = args
    for i in range(lo, hi):
        out = kernel.run_thinning(
            mu, alpha, beta, codes, p1, p2,
            0.0, plan.T, mu, stream_key(cfg.master_seed, i, domain),
            False, plan.checkpoints,
            cfg.event_cap, REFRESH_INTERVAL, DEATH_THRESHOLD,
        )
        if out["capped"]:
            raise RunawayProcessError(
                f"path {i} at T={plan.T} exceeded the event cap {cfg.event_cap}"
            )
        table[i] = plan.evaluate(out)


def run_experiment(cfg: ExperimentConfig, threads: int | None = None,
                   backend: str | None = None) -> ExperimentSummary:
    """Run the experiment; see the module docstring for the contract."""
    require_valid(cfg.model)
    kernel = get_kernel(backend)
    n_threads = resolve_threads(threads)
    args = cfg.model.kernel_arrays()

    records = []
    histograms = {}
    timings = {"per_T": {}, "backend": kernel.BACKEND_NAME, "threads": n_threads}
    t_start = time.perf_counter()

    for k, T in enumerate(cfg.T_list):
        tic = time.perf_counter()
        plan = _StatPlan(cfg, T)
        table = np.empty((cfg.n_paths, plan.dim))
        domain = DOMAIN_PATHS + k
        if n_threads == 1 or cfg.n_paths < 2 * n_threads:
            _simulate_block(kernel, args, cfg, plan, domain, 0, cfg.n_paths, table)
        else:
            chunk = -(-cfg.n_paths // n_threads)
            bounds = [(lo, min(lo + chunk, cfg.n_paths))
                      for lo in range(0, cfg.n_paths, chunk)]
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                futs = [pool.submit(_simulate_block, kernel, args, cfg, plan,
                                    domain, lo, hi, table)
                        for lo, hi in bounds]
                for f in futs:
                    f.result()

        mean = batch_mean(table)
        cov, se = batch_covariance(table)
        diff = cov - plan.sigma
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                     np.where(diff == 0.0, 0.0, np.inf))
        record = {
            "T": T,
            "n_paths": cfg.n_paths,
            "statistic": cfg.statistic,
            "mean": mean.tolist(),
            "empirical_cov": cov.tolist(),
            "theoretical_cov": plan.sigma.tolist(),
            "cov_se": se.tolist(),
            "cov_z": z.tolist(),
            "max_abs_cov_z": float(np.max(np.abs(z))),
            "centering_remainder": plan.remainder,
        }

        if cfg.test_function is not None:
            scale = cfg.test_function["scale"]
            fvals = np.exp(-scale * (table * table).sum(axis=1))
            est = float(batch_mean(fvals[:, None])[0])
            fse = float(np.std(fvals, ddof=1) / math.sqrt(cfg.n_paths))
            ref = moments.gaussian_test_expectation(plan.sigma, scale=scale)
            record["test_function"] = {
                "kind": "exp_quadratic",
                "scale": scale,
                "estimate": est,
                "se": fse,
                "reference": ref,
                "discrepancy": est - ref,
                "abs_discrepancy": abs(est - ref),
            }
        else:
            record["test_function"] = None

        if cfg.histogram is not None and plan.dim == 2:
            bins = cfg.histogram.get("bins", [40, 40])
            rng_spec = cfg.histogram.get("range")
            gauss = sample_gaussian(plan.sigma, cfg.n_paths, cfg.master_seed + k)
            if rng_spec is None:
                both = np.vstack([table, gauss])
                lim = float(np.max(np.abs(both)))
                rng_spec = [[-lim, lim], [-lim, lim]]
            sc, xe, ye = histogram2d(table, bins, rng_spec)
            gc, _, _ = histogram2d(gauss, bins, rng_spec)
            histograms[T] = {"statistic": sc, "gaussian": gc,
                             "x_edges": xe, "y_edges": ye}
            record["histogram_range"] = rng_spec

        records.append(record)
        timings["per_T"][str(T)] = time.perf_counter() - tic

    timings["total_s"] = time.perf_counter() - t_start
    provenance = {
        "master_seed": cfg.master_seed,
        "n_paths": cfg.n_paths,
        "statistic": cfg.statistic,
        "T_list": list(cfg.T_list),
        "v_grid": None if cfg.v_grid is None else list(cfg.v_grid),
        "model_hash": cfg.model.content_hash(),
        "config_hash": cfg.config_hash(),
    }
    return ExperimentSummary(records=records, provenance=provenance,
                             histograms=histograms, timings=timings)
