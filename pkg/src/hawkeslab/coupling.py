"""The zero-baseline companion process started by a single inserted event.

Perturbing the driving noise of component ``j`` at time ``t`` with an event
of mark ``x`` shifts the path by a generalized compound Hawkes process whose
intensity starts at ``x * A[:, j]``, has no baseline, and is otherwise driven
by the same excitation dynamics.  Being subcritical it dies out almost
surely; its conditional mean intensity is the closed form

    E[lambda~_s] = x * exp(-V (s - t)) A[:, j],      s >= t.

``simulate_tilde`` reuses the exact thinning kernel with baseline zero, and
``tilde_mean`` evaluates the closed form, giving the Monte Carlo cross-check
an analytic partner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import HawkesModel, require_valid
from .rng import stream_key
from .simulator import DEFAULT_EVENT_CAP, SimulatedPath, _freeze, _run


@dataclass(frozen=True)
class TildeConfig:
    """Insertion point of the companion process.

    ``component`` is 0-based (the CLI's JSON schema is 1-based and converts).
    """

    model: HawkesModel
    component: int
    t: float
    x: float
    horizon: float

    def __post_init__(self):
        if not 0 <= self.component < self.model.d:
            raise ValueError(f"component {self.component} outside [0, {self.model.d})")
        if not self.x > 0:
            raise ValueError("inserted mark x must be positive")
        if not self.horizon > self.t:
            raise ValueError("horizon must exceed the insertion time t")


def _zero_baseline(model: HawkesModel) -> HawkesModel:
    return HawkesModel(model.d, np.zeros(model.d), model.alpha, model.beta, model.marks)


def simulate_tilde(cfg: TildeConfig, seed: int, *,
                   checkpoints=None, event_cap: int = DEFAULT_EVENT_CAP,
                   backend: str | None = None):
    """Simulate the companion process on [t, horizon].

    Returns a ``SimulatedPath`` (events may legitimately be empty) and, when
    ``checkpoints`` is given, the kernel's per-checkpoint state table as a
    second value ``(path, ck)`` with ``ck['lambda']``, ``ck['L']``,
    ``ck['H']``, ``ck['int']`` arrays of shape (len(checkpoints), d).
    """
    require_valid(cfg.model)
    lam0 = cfg.x * cfg.model.alpha[:, cfg.component]
    out = _run(_zero_baseline(cfg.model), cfg.t, cfg.horizon, lam0,
               stream_key(seed, 0), collect_events=True,
               checkpoints=checkpoints, event_cap=event_cap, backend=backend)
    path = SimulatedPath(
        model_id=cfg.model.content_hash(),
        T=float(cfg.horizon),
        t0=float(cfg.t),
        times=_freeze(out["times"]),
        components=_freeze(out["components"]),
        marks=_freeze(out["marks"]),
        lambda_T=_freeze(out["lambda_end"]),
        L_T=_freeze(out["L"]),
        H_T=_freeze(out["H"]),
        int_lambda=_freeze(out["int_lambda"]),
        seed=int(seed),
    )
    if checkpoints is None:
        return path
    ck = {"lambda": out["ck_lambda"], "L": out["ck_L"],
          "H": out["ck_H"], "int": out["ck_int"]}
    return path, ck


def tilde_mean(cfg: TildeConfig, s: float) -> np.ndarray:
    """Closed-form mean intensity x exp(-V (s-t)) A[:, j] of the companion."""
    if s < cfg.t:
        raise ValueError("s must not precede the insertion time t")
    require_valid(cfg.model)
    V = cfg.model.V()
    return cfg.x * (linalg.mat_exp(V, -(s - cfg.t)) @ cfg.model.alpha[:, cfg.component])
