"""Command-line front end.

One JSON config file drives every subcommand; each subcommand reads its own
section plus the shared ``model`` section.  See README for the schema.

Exit codes: 0 success, 1 usage/config error, 2 stability-assumption failure,
3 runtime error.  Primary outputs are byte-deterministic for a fixed config
(wall-clock timings go to ``*.timing.json`` sidecars), and ``--threads``
never changes any primary output byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import moments as moments_mod
from .coupling import TildeConfig, simulate_tilde, tilde_mean
from .errors import HawkesLabError, ModelValidationError
from .mc import ExperimentConfig, run_experiment
from .model import HawkesModel, validate
from .simulator import path_to_files, simulate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSUMPTIONS = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path) as fp:
            cfg = json.load(fp)
    except OSError as e:
        raise _UsageError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise _UsageError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise _UsageError("config root must be a JSON object")
    return cfg


def _apply_overrides(cfg: dict, pairs: list[str]) -> dict:
    """Apply repeated --set key=value with dotted key paths."""
    applied = {}
    for pair in pairs:
        if "=" not in pair:
            raise _UsageError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise _UsageError(f"--set path {key!r} crosses a non-object")
        node[parts[-1]] = value
        applied[key] = value
    return applied


def _model_from(cfg: dict) -> HawkesModel:
    if "model" not in cfg:
        raise _UsageError("config is missing the 'model' section")
    return HawkesModel.from_dict(cfg["model"])


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name)
    if sec is None:
        raise _UsageError(f"config is missing the '{name}' section")
    if not isinstance(sec, dict):
        raise _UsageError(f"config section '{name}' must be an object")
    return dict(sec)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fp:
        json.dump(obj, fp, sort_keys=True, indent=2)
        fp.write("\n")


def _grid_csv(path: Path, counts, x_edges, y_edges, header: dict) -> None:
    with open(path, "w") as fp:
        for k, v in header.items():
            fp.write(f"# {k}={v}\n")
        fp.write("# x_edges=" + ",".join(repr(float(x)) for x in x_edges) + "\n")
        fp.write("# y_edges=" + ",".join(repr(float(y)) for y in y_edges) + "\n")
        for row in counts:
            fp.write(",".join(repr(float(c)) for c in row) + "\n")


# -- subcommands -------------------------------------------------------------


def _cmd_validate(args, cfg) -> int:
    model = _model_from(cfg)
    report = validate(model)
    doc = report.to_dict()
    print(json.dumps(doc, sort_keys=True, indent=2))
    if args.out:
        _write_json(_out_dir(args) / "report.json", doc)
    return EXIT_OK if report.all_ok else EXIT_ASSUMPTIONS


def _cmd_simulate(args, cfg) -> int:
    model = _model_from(cfg)
    sec = _section(cfg, "simulate")
    seed = int(args.seed if args.seed is not None else sec.get("seed", 0))
    path = simulate(model, float(sec["T"]), seed)
    out = _out_dir(args)
    path_to_files(path, out / "path.csv", out / "path.json")
    print(f"wrote {path.n_events} events to {out / 'path.csv'}", file=sys.stderr)
    return EXIT_OK


def _cmd_moments(args, cfg) -> int:
    model = _model_from(cfg)
    sec = cfg.get("moments") or {}
    ms = moments_mod.limit_covariances(model)
    doc = ms.to_dict()
    if sec.get("v_grid"):
        doc["Chat"] = moments_mod.multimarginal_covariance(model, sec["v_grid"]).tolist()
        doc["v_grid"] = [float(v) for v in sec["v_grid"]]
    doc["model_hash"] = model.content_hash()
    _write_json(_out_dir(args) / "moments.json", doc)
    return EXIT_OK


def _experiment_config(model, sec, args) -> ExperimentConfig:
    seed = int(args.seed if args.seed is not None else sec.get("master_seed", 0))
    try:
        return ExperimentConfig(
            model=model,
            statistic=sec.get("statistic", "Yprime"),
            T_list=tuple(sec["T_list"]),
            n_paths=int(sec["n_paths"]),
            master_seed=seed,
            v_grid=tuple(sec["v_grid"]) if sec.get("v_grid") else None,
            test_function=sec.get("test_function"),
            histogram=sec.get("histogram"),
            event_cap=int(sec.get("event_cap", 10_000_000)),
        )
    except KeyError as e:
        raise _UsageError(f"experiment section is missing field {e}") from e
    except ValueError as e:
        raise _UsageError(str(e)) from e


def _run_and_write(args, cfg, section_name: str, overrides: dict) -> int:
    model = _model_from(cfg)
    sec = _section(cfg, section_name)
    ecfg = _experiment_config(model, sec, args)
    summary = run_experiment(ecfg, threads=args.threads)
    summary.provenance["overrides"] = overrides

    out = _out_dir(args)
    with open(out / "summary.json", "w") as fp:
        fp.write(summary.to_json())
    _write_json(out / "summary.timing.json", summary.timings)

    header = {
        "master_seed": ecfg.master_seed,
        "config_hash": ecfg.config_hash(),
    }
    for T, grids in summary.histograms.items():
        tag = f"{T:g}"
        _grid_csv(out / f"hist_T{tag}_statistic.csv", grids["statistic"],
                  grids["x_edges"], grids["y_edges"], header)
        _grid_csv(out / f"hist_T{tag}_gaussian.csv", grids["gaussian"],
                  grids["x_edges"], grids["y_edges"], header)

    if section_name == "sweep":
        with open(out / "discrepancy.csv", "w") as fp:
            for k, v in header.items():
                fp.write(f"# {k}={v}\n")
            fp.write("T,estimate,reference,discrepancy,abs_discrepancy,se,n_paths\n")
            for rec in summary.records:
                tf = rec["test_function"]
                if tf is None:
                    raise _UsageError("sweep requires a test_function in config")
                fp.write(",".join([
                    repr(rec["T"]), repr(tf["estimate"]), repr(tf["reference"]),
                    repr(tf["discrepancy"]), repr(tf["abs_discrepancy"]),
                    repr(tf["se"]), str(rec["n_paths"]),
                ]) + "\n")

    for rec in summary.records:
        line = f"T={rec['T']:g} max|z(cov)|={rec['max_abs_cov_z']:.3f}"
        if rec["test_function"]:
            line += f" |Ef - Ef(G)|={rec['test_function']['abs_discrepancy']:.5f}"
        print(line, file=sys.stderr)
    return EXIT_OK


def _cmd_clt(args, cfg, overrides) -> int:
    return _run_and_write(args, cfg, "clt", overrides)


def _cmd_sweep(args, cfg, overrides) -> int:
    return _run_and_write(args, cfg, "sweep", overrides)


def _cmd_tilde_check(args, cfg) -> int:
    model = _model_from(cfg)
    sec = _section(cfg, "tilde_check")
    seed = int(args.seed if args.seed is not None else sec.get("master_seed", 0))
    try:
        component = int(sec["component"]) - 1  # config is 1-based
        tcfg = TildeConfig(model=model, component=component,
                           t=float(sec.get("t", 0.0)), x=float(sec["x"]),
                           horizon=float(sec["horizon"]))
        s_grid = [float(s) for s in sec["s_grid"]]
        n_runs = int(sec["n_runs"])
    except KeyError as e:
        raise _UsageError(f"tilde_check section is missing field {e}") from e
    if any(s < tcfg.t or s > tcfg.horizon for s in s_grid):
        raise _UsageError("s_grid must lie within [t, horizon]")

    ck = np.asarray(s_grid, dtype=float)
    lam_sum = np.zeros((len(s_grid), model.d))
    lam_sq = np.zeros((len(s_grid), model.d))
    h_sum = np.zeros(model.d)
    int_sum = np.zeros(model.d)
    for i in range(n_runs):
        path, state = simulate_tilde(tcfg, seed + i, checkpoints=ck)
        lam_sum += state["lambda"]
        lam_sq += state["lambda"] ** 2
        h_sum += path.H_T
        int_sum += path.int_lambda

    mc_mean = lam_sum / n_runs
    mc_se = np.sqrt(np.maximum(lam_sq / n_runs - mc_mean**2, 0.0) / n_runs)
    theory = np.array([tilde_mean(tcfg, s) for s in s_grid])
    z = np.where(mc_se > 0, (mc_mean - theory) / np.where(mc_se > 0, mc_se, 1.0), 0.0)
    doc = {
        "component": component + 1,
        "x": tcfg.x,
        "t": tcfg.t,
        "horizon": tcfg.horizon,
        "n_runs": n_runs,
        "master_seed": seed,
        "s_grid": s_grid,
        "mc_mean_intensity": mc_mean.tolist(),
        "theory_mean_intensity": theory.tolist(),
        "mc_se": mc_se.tolist(),
        "z_scores": z.tolist(),
        "max_abs_z": float(np.max(np.abs(z))) if z.size else 0.0,
        "mean_event_count": (h_sum / n_runs).tolist(),
        "mean_integrated_intensity": (int_sum / n_runs).tolist(),
    }
    _write_json(_out_dir(args) / "tilde_check.json", doc)
    print(f"tilde check: max |z| = {doc['max_abs_z']:.3f}", file=sys.stderr)
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hawkes-lab",
        description="Simulation and verification lab for multivariate "
                    "compound Hawkes processes with exponential kernels.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("validate", "check the stability assumptions of the model"),
        ("simulate", "simulate one path and export CSV + JSON sidecar"),
        ("moments", "write the closed-form limit covariances"),
        ("clt", "run a Monte Carlo CLT experiment"),
        ("sweep", "run the horizon sweep of the test-function discrepancy"),
        ("tilde-check", "verify the inserted-event companion process mean"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the section's master seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (never changes results); "
                            "falls back to HAWKES_LAB_THREADS")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config entry by dotted path (repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        overrides = _apply_overrides(cfg, args.overrides)
        if args.command == "validate":
            return _cmd_validate(args, cfg)
        if args.command == "simulate":
            return _cmd_simulate(args, cfg)
        if args.command == "moments":
            return _cmd_moments(args, cfg)
        if args.command == "clt":
            return _cmd_clt(args, cfg, overrides)
        if args.command == "sweep":
            return _cmd_sweep(args, cfg, overrides)
        if args.command == "tilde-check":
            return _cmd_tilde_check(args, cfg)
        raise _UsageError(f"unknown command {args.command}")
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelValidationError as e:
        print(f"model fails stability assumptions: {e}", file=sys.stderr)
        return EXIT_ASSUMPTIONS
    except HawkesLabError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyError as e:
        print(f"error: config missing field {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
