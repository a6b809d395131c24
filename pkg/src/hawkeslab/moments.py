"""Closed-form first- and second-order asymptotics of the compound process.

With V = B - A diag(m) and lambda_bar = V^-1 B mu:

* mean intensity        E[lambda_t] = lambda_bar + exp(-V t)(mu - lambda_bar)
* its time integral     int_0^T E[lambda_t] dt
                          = lambda_bar T + (I - exp(-V T)) V^-1 (mu - lambda_bar)
* limit covariance of the normalized martingale F_T:
                          C = diag(m2_j * lambda_bar_j)
* limit covariance of the centered loss Y'_T:
                          Ctilde = J C J^T,  J = (I - diag(m) B^-1 A)^-1
* multi-marginal limit covariance of (F^n at horizons v_q T): block diagonal,
  block n has entries m2_n * lambda_bar_n * sqrt(v_i / v_j) for i <= j.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import IndefiniteMatrixError
from .model import HawkesModel, require_valid


@dataclass(frozen=True)
class MomentSet:
    """The matrices (V, J, lambda_bar, C, Ctilde) of one validated model."""

    V: np.ndarray
    J: np.ndarray
    lambda_bar: np.ndarray
    C: np.ndarray
    Ctilde: np.ndarray

    def to_dict(self) -> dict:
        return {
            "V": self.V.tolist(),
            "J": self.J.tolist(),
            "lambda_bar": self.lambda_bar.tolist(),
            "C": self.C.tolist(),
            "Ctilde": self.Ctilde.tolist(),
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def mean_intensity(model: HawkesModel, t: float) -> np.ndarray:
    """E[lambda_t] for the validated model (exact, via the matrix exponential)."""
    require_valid(model)
    if t < 0:
        raise ValueError("t must be nonnegative")
    V = model.V()
    lam_bar = linalg.solve(V, model.beta * model.mu)
    return lam_bar + linalg.mat_exp(V, -t) @ (model.mu - lam_bar)


def integrated_mean_intensity(model: HawkesModel, T: float) -> np.ndarray:
    """int_0^T E[lambda_t] dt in closed form."""
    require_valid(model)
    if T < 0:
        raise ValueError("T must be nonnegative")
    V = model.V()
    lam_bar = linalg.solve(V, model.beta * model.mu)
    tail = linalg.solve(V, model.mu - lam_bar)
    return lam_bar * T + (np.eye(model.d) - linalg.mat_exp(V, -T)) @ tail


def limit_covariances(model: HawkesModel) -> MomentSet:
    """The limit covariance matrices C and Ctilde plus V, J, lambda_bar."""
    require_valid(model)
    m1, m2, _ = model.mark_moment_vectors()
    V = model.V()
    lam_bar = linalg.solve(V, model.beta * model.mu)
    J = linalg.inverse(np.eye(model.d) - (m1 / model.beta)[:, None] * model.alpha)
    C = np.diag(m2 * lam_bar)
    X = J @ C @ J.T
    Ctilde = 0.5 * (X + X.T)  # symmetrize last-ulp asymmetry from the products
    return MomentSet(V=V, J=J, lambda_bar=lam_bar, C=C, Ctilde=Ctilde)


def multimarginal_covariance(model: HawkesModel, v) -> np.ndarray:
    """Block-diagonal limit covariance of the multi-horizon martingale vector.

    ``v`` is a strictly increasing grid 0 < v_1 < ... < v_p <= 1; the result
    is (p d) x (p d), ordered component-major: entry (n p + i, n p + j) is
    m2_n * lambda_bar_n * sqrt(v_min / v_max) for horizons v_i T, v_j T.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("v must be a nonempty 1-D grid")
    if not (v[0] > 0 and v[-1] <= 1.0 and np.all(np.diff(v) > 0)):
        raise ValueError("v must be strictly increasing within (0, 1]")
    require_valid(model)
    m1, m2, _ = model.mark_moment_vectors()
    lam_bar = linalg.solve(model.V(), model.beta * model.mu)

    p = v.size
    ratio = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            lo, hi = (i, j) if i <= j else (j, i)
            ratio[i, j] = math.sqrt(v[lo] / v[hi])
    out = np.zeros((p * model.d, p * model.d))
    for n in range(model.d):
        out[n * p:(n + 1) * p, n * p:(n + 1) * p] = m2[n] * lam_bar[n] * ratio
    return out


def gaussian_test_expectation(Sigma, scale: float = 0.25) -> float:
    """E[exp(-scale ||G||^2)] for G ~ N(0, Sigma): det(I + 2 scale Sigma)^(-1/2)."""
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ValueError("Sigma must be square")
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    sym_scale = max(1.0, float(np.max(np.abs(Sigma))) if Sigma.size else 1.0)
    if np.max(np.abs(Sigma - Sigma.T), initial=0.0) > 1e-10 * sym_scale:
        raise IndefiniteMatrixError("Sigma must be symmetric")
    if Sigma.size and np.min(np.linalg.eigvalsh(0.5 * (Sigma + Sigma.T))) < -1e-10 * sym_scale:
        raise IndefiniteMatrixError("Sigma must be positive semidefinite")
    sign, logdet = np.linalg.slogdet(np.eye(Sigma.shape[0]) + 2.0 * scale * Sigma)
    if sign <= 0:
        raise IndefiniteMatrixError("I + 2 scale Sigma is not positive definite")
    return float(math.exp(-0.5 * logdet))


def deterministic_remainder(model: HawkesModel, T: float) -> np.ndarray:
    """The deterministic gap diag(m) (int_0^T E[lambda] dt - lambda_bar T)/sqrt(T)
    between the two centerings: Y'_T = Y_T + remainder."""
    if T <= 0:
        raise ValueError("T must be positive")
    m1 = model.mark_mean_vector()
    lam_bar = linalg.solve(model.V(), model.beta * model.mu)
    return m1 * (integrated_mean_intensity(model, T) - lam_bar * T) / math.sqrt(T)
