"""Pure-Python thinning kernel (reference implementation).

This module and the compiled twin ``hawkeslab._core`` implement the same
algorithm with the same floating-point operations in the same order, so the
two backends produce bitwise-identical paths from the same Philox key.  Keep
any change here in lockstep with ``_core.pyx``.

Algorithm (exact Ogata thinning for exponential kernels)
--------------------------------------------------------
State between events is fully described by the right-limit intensity
``lam[i]`` at the last event time ``t_ev``:

    lambda_i(t) = mu_i + (lam_i - mu_i) * exp(-beta_i (t - t_ev)),  t > t_ev,

which is componentwise non-increasing, so the total intensity at the most
recent state change dominates until the next event.  Candidates are proposed
from the piecewise-constant bound ``bound``:

* the bound is set to sum_i lam_i at every accepted event,
* and refreshed (re-evaluated at the current decayed intensity) whenever a
  proposal would overshoot ``refresh_interval`` past the bound's anchor, so
  long quiet stretches regain a tight bound;

both rules keep the bound >= the true total intensity on its interval of
use, hence the simulation is exact.  One uniform drives both the acceptance
test and the component choice.  The integrated intensity is accumulated in
closed form bridge-by-bridge:

    int_{t_ev}^{t} lambda_i = mu_i dt + (lam_i - mu_i)(1 - exp(-beta_i dt))/beta_i.

Mark sampling uses inverse CDFs (exponential) and Marsaglia-Tsang with
inverse-CDF normals (gamma), all fed from the path's single Philox stream.

Checkpoints: a sorted grid of times in (t0, horizon]; for each, the state
(intensity, losses L, counts H, integrated intensity) is recorded lazily
from the anchor state once the clock has irrevocably passed it.  A
checkpoint that collides exactly with an event time (probability zero)
records the post-jump right-limit state.
"""

from __future__ import annotations

from math import exp, log, log1p, sqrt

import numpy as np
from scipy.special import ndtri

from .rng import generator

BACKEND_NAME = "python"


def _draw_gamma_std(nd, shape):
    # Marsaglia-Tsang for shape >= 1 (normals by inverse CDF).
    dd = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * dd)
    while True:
        z = ndtri(nd())
        w = 1.0 + c * z
        v = w * w * w
        if v <= 0.0:
            continue
        u2 = nd()
        z2 = z * z
        if u2 < 1.0 - 0.0331 * (z2 * z2):
            return dd * v
        if u2 == 0.0:  # log(0) accepts in the limit; C and Python must agree
            return dd * v
        if log(u2) < 0.5 * z2 + dd * (1.0 - v + log(v)):
            return dd * v


def _draw_mark(nd, kind, p1, p2):
    if kind == 0:
        return p1
    if kind == 1:
        while True:
            y = -log1p(-nd()) / p1
            if y > 0.0:
                return y
    # gamma(shape=p1, rate=p2); shape < 1 via the boost Gamma(a+1) * U^(1/a)
    while True:
        if p1 < 1.0:
            u = nd()
            while u <= 0.0:
                u = nd()
            boost = u ** (1.0 / p1)
            y = (_draw_gamma_std(nd, p1 + 1.0) * boost) / p2
        else:
            y = _draw_gamma_std(nd, p1) / p2
        if y > 0.0:
            return y


def run_thinning(mu, alpha, beta, mark_kind, mark_p1, mark_p2,
                 t0, horizon, lam0, key,
                 collect_events, checkpoints,
                 event_cap, refresh_interval, death_threshold):
    """Simulate one path; see the module docstring for the algorithm.

    Returns a dict with events (if collected), terminal aggregates, and the
    per-checkpoint state table.  Raises no domain errors itself; the caller
    validates the model.  On hitting ``event_cap`` the dict carries
    ``capped=True`` and the caller raises.
    """
    d = len(mu)
    mu = [float(x) for x in mu]
    beta = [float(x) for x in beta]
    a = [[float(alpha[i][j]) for j in range(d)] for i in range(d)]
    kinds = [int(k) for k in mark_kind]
    p1 = [float(x) for x in mark_p1]
    p2 = [float(x) for x in mark_p2]
    ck = [float(s) for s in checkpoints] if checkpoints is not None else []
    n_ck = len(ck)

    nd = generator(key).random

    lam = [float(x) for x in lam0]
    lam_c = [0.0] * d
    integ = [0.0] * d
    L = [0.0] * d
    H = [0] * d
    ck_lambda = np.zeros((n_ck, d))
    ck_L = np.zeros((n_ck, d))
    ck_H = np.zeros((n_ck, d), dtype=np.int64)
    ck_int = np.zeros((n_ck, d))

    times, comps, marks = [], [], []

    t_ev = float(t0)
    t_b = float(t0)
    t_cur = float(t0)
    bound = 0.0
    for i in range(d):
        bound += lam[i]
    q = 0
    n_ev = 0
    n_cand = 0
    capped = False

    def record_checkpoint(k):
        s = ck[k]
        dt = s - t_ev
        for i in range(d):
            e = exp(-beta[i] * dt)
            ck_lambda[k, i] = mu[i] + (lam[i] - mu[i]) * e
            ck_int[k, i] = integ[i] + mu[i] * dt + (lam[i] - mu[i]) * (1.0 - e) / beta[i]
            ck_L[k, i] = L[i]
            ck_H[k, i] = H[i]

    while True:
        if bound <= death_threshold:
            break
        gap = -log1p(-nd()) / bound
        while not gap > 0.0:
            gap = -log1p(-nd()) / bound
        t_c = t_cur + gap
        tick = t_b + refresh_interval
        if tick < horizon:
            stop = tick
        else:
            stop = horizon
        if t_c > stop:
            if stop == tick and tick < horizon:
                # refresh the dominating bound at the decayed intensity
                s = 0.0
                for i in range(d):
                    s += mu[i] + (lam[i] - mu[i]) * exp(-beta[i] * (tick - t_ev))
                bound = s
                t_b = tick
                t_cur = tick
                continue
            break  # next candidate falls beyond the horizon

        n_cand += 1
        tot = 0.0
        for i in range(d):
            lam_c[i] = mu[i] + (lam[i] - mu[i]) * exp(-beta[i] * (t_c - t_ev))
            tot += lam_c[i]
        u2 = nd() * bound
        if u2 < tot:
            # accepted: pick the component by the same uniform
            j = d - 1
            cum = 0.0
            for i in range(d):
                cum += lam_c[i]
                if u2 < cum:
                    j = i
                    break
            y = _draw_mark(nd, kinds[j], p1[j], p2[j])
            while q < n_ck and ck[q] < t_c:
                record_checkpoint(q)
                q += 1
            dt = t_c - t_ev
            for i in range(d):
                integ[i] += mu[i] * dt + (lam[i] - mu[i]) * (1.0 - exp(-beta[i] * dt)) / beta[i]
                lam[i] = lam_c[i] + a[i][j] * y
            L[j] += y
            H[j] += 1
            n_ev += 1
            if collect_events:
                times.append(t_c)
                comps.append(j)
                marks.append(y)
            t_ev = t_c
            t_b = t_c
            t_cur = t_c
            bound = 0.0
            for i in range(d):
                bound += lam[i]
            if n_ev >= event_cap:
                capped = True
                break
        else:
            t_cur = t_c

    # finalize at the horizon
    while q < n_ck and ck[q] <= horizon:
        record_checkpoint(q)
        q += 1
    int_lambda = [0.0] * d
    lam_end = [0.0] * d
    dt = horizon - t_ev
    for i in range(d):
        e = exp(-beta[i] * dt)
        int_lambda[i] = integ[i] + mu[i] * dt + (lam[i] - mu[i]) * (1.0 - e) / beta[i]
        lam_end[i] = mu[i] + (lam[i] - mu[i]) * e

    return {
        "times": np.array(times, dtype=float),
        "components": np.array(comps, dtype=np.int32),
        "marks": np.array(marks, dtype=float),
        "n_events": n_ev,
        "n_candidates": n_cand,
        "L": np.array(L, dtype=float),
        "H": np.array(H, dtype=np.int64),
        "int_lambda": np.array(int_lambda, dtype=float),
        "lambda_end": np.array(lam_end, dtype=float),
        "ck_lambda": ck_lambda,
        "ck_L": ck_L,
        "ck_H": ck_H,
        "ck_int": ck_int,
        "capped": capped,
    }
