"""Exact simulation of the marked process and pathwise exact integrals.

``simulate`` runs the thinning kernel (see ``_kernel_py`` for the algorithm)
and returns a ``SimulatedPath`` carrying the ordered events, the terminal
intensity, and the exact integrated intensity -- no discretization anywhere.
Identical (model, horizon, seed) always reproduce the same path bitwise,
whichever backend executes it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernel
from .errors import RunawayProcessError
from .model import HawkesModel, require_valid
from .rng import stream_key

DEFAULT_EVENT_CAP = 10_000_000
# bound refresh cadence for quiet stretches; any positive value is exact
REFRESH_INTERVAL = 1.0
DEATH_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SimulatedPath:
    """One realized path on [t0, T].

    ``components`` are 0-based in memory; the CSV export writes them 1-based
    (see :func:`path_to_csv`).  ``int_lambda`` is the exact integral of the
    intensity over [t0, T], computed in closed form alongside the events.
    """

    model_id: str
    T: float
    t0: float
    times: np.ndarray
    components: np.ndarray
    marks: np.ndarray
    lambda_T: np.ndarray
    L_T: np.ndarray
    H_T: np.ndarray
    int_lambda: np.ndarray
    seed: int

    @property
    def n_events(self) -> int:
        return int(self.times.shape[0])


def _freeze(a):
    a.flags.writeable = False
    return a


def _run(model, t0, horizon, lam0, key, *, collect_events=True, checkpoints=None,
         event_cap=DEFAULT_EVENT_CAP, backend=None):
    mu, alpha, beta, codes, p1, p2 = model.kernel_arrays()
    kernel = get_kernel(backend)
    if checkpoints is not None:
        checkpoints = np.asarray(checkpoints, dtype=float)
        if checkpoints.size and not (
                np.all(np.diff(checkpoints) > 0)
                and checkpoints[0] > t0 and checkpoints[-1] <= horizon):
            raise ValueError("checkpoints must be strictly increasing within "
                             f"({t0}, {horizon}]")
    out = kernel.run_thinning(
        mu, alpha, beta, codes, p1, p2,
        float(t0), float(horizon), np.asarray(lam0, dtype=float), int(key),
        bool(collect_events), checkpoints,
        int(event_cap), REFRESH_INTERVAL, DEATH_THRESHOLD,
    )
    if out["capped"]:
        raise RunawayProcessError(
            f"path exceeded the event cap of {event_cap} events before t={horizon}; "
            "the model may be (near-)critical"
        )
    return out


def simulate(model: HawkesModel, T: float, seed: int, *,
             event_cap: int = DEFAULT_EVENT_CAP, backend: str | None = None
             ) -> SimulatedPath:
    """Exact thinning simulation of the model on [0, T].

    ``seed`` identifies the path's random stream (stream 0 of that seed, so
    ``simulate(model, T, s)`` coincides with path 0 of a Monte Carlo run with
    master seed ``s``).
    """
    require_valid(model)
    if not T > 0:
        raise ValueError("horizon T must be positive")
    out = _run(model, 0.0, T, model.mu, stream_key(seed, 0),
               event_cap=event_cap, backend=backend)
    return SimulatedPath(
        model_id=model.content_hash(),
        T=float(T),
        t0=0.0,
        times=_freeze(out["times"]),
        components=_freeze(out["components"]),
        marks=_freeze(out["marks"]),
        lambda_T=_freeze(out["lambda_end"]),
        L_T=_freeze(out["L"]),
        H_T=_freeze(out["H"]),
        int_lambda=_freeze(out["int_lambda"]),
        seed=int(seed),
    )


def intensity_at(path: SimulatedPath, model: HawkesModel, t: float) -> np.ndarray:
    """Left limit of the intensity at ``t``: baseline plus the decayed kernel
    contribution of every event strictly before ``t``."""
    if not (path.t0 <= t <= path.T):
        raise ValueError(f"t={t} outside the simulated window [{path.t0}, {path.T}]")
    before = path.times < t
    lam = np.array(model.mu, dtype=float, copy=True)
    if before.any():
        dt = t - path.times[before]
        contrib = model.alpha[:, path.components[before]] * path.marks[before][None, :]
        lam += (contrib * np.exp(-np.outer(model.beta, dt))).sum(axis=1)
    return lam


def intensity_on_grid(path: SimulatedPath, model: HawkesModel, ts) -> np.ndarray:
    """Left-limit intensity at each sorted grid time (shape: len(ts) x d).

    Linear-time recursion over the merged grid/event sequence; equivalent to
    calling :func:`intensity_at` pointwise but usable on large grids.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or (ts.size and (ts[0] < path.t0 or ts[-1] > path.T)):
        raise ValueError("grid must be 1-D within the simulated window")
    if np.any(np.diff(ts) < 0):
        raise ValueError("grid must be sorted")
    d = model.d
    out = np.empty((ts.size, d))
    # g = decaying excess intensity (lambda - mu) carried along the sweep
    g = np.zeros(d)
    t_prev = path.t0
    k = 0  # next event not yet folded into g
    n_ev = path.n_events
    for idx, t in enumerate(ts):
        while k < n_ev and path.times[k] < t:
            tau = path.times[k]
            g = g * np.exp(-model.beta * (tau - t_prev))
            g = g + model.alpha[:, path.components[k]] * path.marks[k]
            t_prev = tau
            k += 1
        out[idx] = model.mu + g * np.exp(-model.beta * (t - t_prev))
    return out


# -- export / import --------------------------------------------------------


def path_to_csv(path: SimulatedPath, fp) -> None:
    """Write the events as ``time,component,mark`` (components 1-based)."""
    w = csv.writer(fp)
    w.writerow(["time", "component", "mark"])
    for t, c, y in zip(path.times, path.components, path.marks):
        w.writerow([repr(float(t)), int(c) + 1, repr(float(y))])


def path_sidecar(path: SimulatedPath) -> dict:
    """JSON-ready sidecar with the horizon, seed, and exact aggregates."""
    return {
        "model_id": path.model_id,
        "T": path.T,
        "t0": path.t0,
        "seed": path.seed,
        "n_events": path.n_events,
        "L_T": path.L_T.tolist(),
        "H_T": path.H_T.tolist(),
        "int_lambda": path.int_lambda.tolist(),
        "lambda_T": path.lambda_T.tolist(),
    }


def path_to_files(path: SimulatedPath, csv_path, json_path) -> None:
    with open(csv_path, "w", newline="") as fp:
        path_to_csv(path, fp)
    with open(json_path, "w") as fp:
        json.dump(path_sidecar(path), fp, sort_keys=True, indent=2)
        fp.write("\n")


def path_from_files(csv_path, json_path) -> SimulatedPath:
    with open(json_path) as fp:
        meta = json.load(fp)
    times, comps, marks = [], [], []
    with open(csv_path, newline="") as fp:
        for row in csv.DictReader(fp):
            times.append(float(row["time"]))
            comps.append(int(row["component"]) - 1)
            marks.append(float(row["mark"]))
    return SimulatedPath(
        model_id=meta["model_id"],
        T=float(meta["T"]),
        t0=float(meta.get("t0", 0.0)),
        times=_freeze(np.array(times, dtype=float)),
        components=_freeze(np.array(comps, dtype=np.int32)),
        marks=_freeze(np.array(marks, dtype=float)),
        lambda_T=_freeze(np.array(meta["lambda_T"], dtype=float)),
        L_T=_freeze(np.array(meta["L_T"], dtype=float)),
        H_T=_freeze(np.array(meta["H_T"], dtype=np.int64)),
        int_lambda=_freeze(np.array(meta["int_lambda"], dtype=float)),
        seed=int(meta["seed"]),
    )
