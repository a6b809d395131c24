"""Normalized functionals of a path and their exact decomposition.

For a path on [0, T] with losses L_T, intensity integral I_T = int lambda,
mark means m, and stationary intensity lambda_bar:

    F_T  = (L_T - m * I_T) / sqrt(T)                   (martingale statistic)
    Y_T  = (L_T - m * int_0^T E[lambda]) / sqrt(T)
    Y'_T = (L_T - m * lambda_bar * T) / sqrt(T)
    R_T  = m * V^-1 (E[lambda_T] - lambda_T) / sqrt(T)

These satisfy the pathwise identity Y_T = J F_T + R_T exactly (up to float
roundoff), which the test suite leans on heavily.  The multi-horizon vector
Gamma_T stacks F^n_{v_q T} for a grid v, component-major, matching the block
layout of the multi-marginal limit covariance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import linalg, moments
from .model import HawkesModel
from .simulator import SimulatedPath


@dataclass(frozen=True)
class CltSample:
    F_T: np.ndarray
    Y_T: np.ndarray
    Yprime_T: np.ndarray
    R_T: np.ndarray
    Gamma_T: np.ndarray | None
    T: float

    def to_dict(self) -> dict:
        d = {
            "T": self.T,
            "F_T": self.F_T.tolist(),
            "Y_T": self.Y_T.tolist(),
            "Yprime_T": self.Yprime_T.tolist(),
            "R_T": self.R_T.tolist(),
        }
        if self.Gamma_T is not None:
            d["Gamma_T"] = self.Gamma_T.tolist()
        return d


def check_v_grid(v_grid) -> np.ndarray:
    v = np.asarray(v_grid, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("v_grid must be a nonempty 1-D sequence")
    if not (v[0] > 0 and v[-1] <= 1.0 and np.all(np.diff(v) > 0)):
        raise ValueError("v_grid must be strictly increasing within (0, 1]")
    return v


def compute_clt_sample(path: SimulatedPath, model: HawkesModel,
                       v_grid=None) -> CltSample:
    """All normalized statistics of one simulated path.

    ``Gamma_T`` (when a v_grid is given) is recomputed exactly from the event
    list truncated at each v_q T; the entry for component n at horizon v_q T
    sits at index n * p + q.
    """
    T = path.T
    sqrtT = math.sqrt(T)
    m1 = model.mark_mean_vector()
    V = model.V()
    lam_bar = linalg.solve(V, model.beta * model.mu)

    F = (path.L_T - m1 * path.int_lambda) / sqrtT
    Y = (path.L_T - m1 * moments.integrated_mean_intensity(model, T)) / sqrtT
    Yp = (path.L_T - m1 * lam_bar * T) / sqrtT
    e_lam_T = moments.mean_intensity(model, T)
    R = m1 * linalg.solve(V, e_lam_T - path.lambda_T) / sqrtT

    gamma = None
    if v_grid is not None:
        v = check_v_grid(v_grid)
        p = v.size
        gamma = np.empty(p * model.d)
        for q, vq in enumerate(v):
            s = vq * T
            cut = np.searchsorted(path.times, s, side="right")
            L_s = np.zeros(model.d)
            np.add.at(L_s, path.components[:cut], path.marks[:cut])
            I_s = model.mu * s
            if cut:
                tau = path.times[:cut]
                w = path.marks[:cut] * (1.0 - np.exp(-np.outer(model.beta, s - tau)))
                for n in range(model.d):
                    I_s[n] += float(
                        (model.alpha[n, path.components[:cut]] * w[n]).sum()
                    ) / model.beta[n]
            gamma[q::p] = (L_s - m1 * I_s) / math.sqrt(s)
    return CltSample(F_T=F, Y_T=Y, Yprime_T=Yp, R_T=R, Gamma_T=gamma, T=T)


def decomposition_residual(sample: CltSample, J: np.ndarray) -> np.ndarray:
    """Y_T - J F_T - R_T; zero up to float roundoff for every path."""
    return sample.Y_T - J @ sample.F_T - sample.R_T


def compensated_gaps(path: SimulatedPath, model: HawkesModel,
                     component: int) -> np.ndarray:
    """Compensator increments between consecutive events of one component.

    If the simulator is exact these are i.i.d. Exp(1) (time-rescaling
    residuals), which the test suite checks with a KS test.
    """
    j = int(component)
    lam_integral = np.empty(path.n_events)
    g = 0.0          # decaying excess of component j
    acc = 0.0        # int_0^tau_k lambda_j
    t_prev = path.t0
    bj = model.beta[j]
    for k in range(path.n_events):
        tau = path.times[k]
        dt = tau - t_prev
        e = math.exp(-bj * dt)
        acc += model.mu[j] * dt + g * (1.0 - e) / bj
        g = g * e + model.alpha[j, path.components[k]] * path.marks[k]
        t_prev = tau
        lam_integral[k] = acc
    own = path.components == j
    vals = np.concatenate(([0.0], lam_integral[own]))
    return np.diff(vals)


# -- batch aggregation -------------------------------------------------------


def _fsum_col(x: np.ndarray) -> float:
    return math.fsum(x.tolist())


def batch_mean(samples: np.ndarray) -> np.ndarray:
    """Column means via exact compensated summation (order-independent bytes)."""
    samples = np.asarray(samples, dtype=float)
    n, k = samples.shape
    return np.array([_fsum_col(samples[:, i]) / n for i in range(k)])


def batch_covariance(samples) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased sample covariance and per-entry standard errors.

    The SE of entry (j, k) uses the asymptotic variance of sample
    covariances, (E[(X_j - mu_j)^2 (X_k - mu_k)^2] - sigma_jk^2) / n,
    estimated with the matching sample moments.  Sums are compensated and in
    fixed index order, so results do not depend on scheduling.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError("need at least 2 sample vectors")
    n, k = samples.shape
    mean = batch_mean(samples)
    centered = samples - mean
    cov = np.empty((k, k))
    se = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            prod = centered[:, i] * centered[:, j]
            s_ij = _fsum_col(prod) / (n - 1)
            m22 = _fsum_col(prod * prod) / n
            var_hat = max(m22 - s_ij * s_ij, 0.0) / n
            cov[i, j] = cov[j, i] = s_ij
            se[i, j] = se[j, i] = math.sqrt(var_hat)
    return cov, se


def write_samples_jsonl(samples, fp) -> None:
    """Stream CltSample records one JSON document per line."""
    for s in samples:
        fp.write(json.dumps(s.to_dict(), sort_keys=True))
        fp.write("\n")


def read_samples_jsonl(fp) -> list[CltSample]:
    out = []
    for line in fp:
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(CltSample(
            F_T=np.array(d["F_T"]),
            Y_T=np.array(d["Y_T"]),
            Yprime_T=np.array(d["Yprime_T"]),
            R_T=np.array(d["R_T"]),
            Gamma_T=np.array(d["Gamma_T"]) if "Gamma_T" in d else None,
            T=float(d["T"]),
        ))
    return out
