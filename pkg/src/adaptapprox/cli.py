"""Command-line entry point: ``adaptapprox <subcommand> ...``.

Datasets on disk are directories holding ``features.csv`` (no header),
``labels.txt`` and ``costs.txt``; ``--features/--labels/--costs`` select
files explicitly instead. Every subcommand prints one JSON summary line on
success; failures print ``{"status": "error", ...}`` on stderr and exit
non-zero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .adapt import AdaptConfig
from .dataset import SplitSpec, gen_synthetic1, gen_synthetic2, load_dataset, load_scores, save_dataset, save_scores, split
from .gating import evaluate, write_report
from .harness import (
    TRAINERS,
    Splits,
    SweepGrid,
    evaluate_on_test,
    export_curve,
    load_curve,
    pareto_frontier,
    pick_budget,
    sweep,
    train_cell,
)
from .serialize import config_from_kv, load_model, load_system, read_kv, save_model, save_system
from .trees import train_gbrt

FEATURES_FILE, LABELS_FILE, COSTS_FILE = "features.csv", "labels.txt", "costs.txt"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, code=2)


def _fail(kind, message, code=1):
    sys.stderr.write(json.dumps({"status": "error", "error": kind, "message": str(message)}) + "\n")
    sys.exit(code)


def _emit(**payload):
    print(json.dumps({"status": "ok", **payload}, sort_keys=True))


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


# --------------------------------------------------------------------------
# dataset arguments
# --------------------------------------------------------------------------


def _write_dir(ds, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out / FEATURES_FILE, out / LABELS_FILE, out / COSTS_FILE)


def _read_dir(path) -> object:
    d = Path(path)
    if not d.is_dir():
        raise CliError(f"{d} is not a dataset directory")
    costs = d / COSTS_FILE
    return load_dataset(d / FEATURES_FILE, d / LABELS_FILE, costs if costs.exists() else None)


def _add_data_args(p, name="data", required=True):
    p.add_argument(f"--{name}", help="dataset directory (features.csv, labels.txt, costs.txt)",
                   required=False)
    if name == "data":
        p.add_argument("--features", help="feature CSV (alternative to --data)")
        p.add_argument("--labels", default="last",
                       help="label file, column index, or 'last' (default) for a trailing column")
        p.add_argument("--costs", help="cost file, one cost per feature")
    p.set_defaults(**{f"_{name}_required": required})


def _dataset_from(args, name="data"):
    path = getattr(args, name, None)
    if path is not None:
        return _read_dir(path)
    if name == "data" and args.features is not None:
        labels = int(args.labels) if args.labels.lstrip("-").isdigit() else args.labels
        return load_dataset(args.features, labels, args.costs)
    if getattr(args, f"_{name}_required"):
        raise CliError(f"--{name} is required" + (" (or --features)" if name == "data" else ""))
    return None


# --------------------------------------------------------------------------
# config arguments
# --------------------------------------------------------------------------

_CONFIG_FIELDS = [f for f in dataclasses.fields(AdaptConfig)]


def _add_config_args(p):
    p.add_argument("--config", help="key = value file with AdaptConfig/SweepGrid fields")
    for f in _CONFIG_FIELDS:
        default = f.default
        typ = str if isinstance(default, str) else int if isinstance(default, int) and not \
            isinstance(default, bool) else float
        if f.name in ("init_trees",):
            typ = int
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=typ, default=None)


def _config_from(args) -> tuple:
    kv = read_kv(args.config) if args.config else {}
    for f in _CONFIG_FIELDS:
        v = getattr(args, f.name)
        if v is not None:
            kv[f.name] = str(v)
    return config_from_kv(kv, AdaptConfig), kv


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_synth(args):
    if args.which == "1":
        ds = gen_synthetic1(args.seed if args.seed is not None else 17, n_samples=args.n_samples)
    else:
        ds = gen_synthetic2() if args.seed is None else gen_synthetic2(args.seed)
    out = Path(args.out)
    if args.split:
        parts = split(ds, SplitSpec(_floats(args.split), args.split_seed))
        for name, part in zip(("train", "validation", "test"), parts):
            _write_dir(part, out / name)
        _emit(command="synth", dataset=args.which, out=str(out),
              sizes=[part.n_examples for part in parts])
    else:
        _write_dir(ds, out)
        _emit(command="synth", dataset=args.which, out=str(out), sizes=[ds.n_examples])


def cmd_train_f0(args):
    ds = _dataset_from(args)
    model = train_gbrt(ds, args.trees, args.depth, args.shrinkage)
    save_model(model, args.model_out)
    written = []
    if args.scores_out:
        save_scores(model.score(ds.features), args.scores_out)
        written.append(args.scores_out)
    for data_dir, out in args.apply or []:
        save_scores(model.score(_read_dir(data_dir).features), out)
        written.append(out)
    acc = float(np.mean(np.where(model.score(ds.features) >= 0, 1, -1) == ds.labels))
    _emit(command="train-f0", model=args.model_out, scores=written, train_accuracy=acc)


def _f0_scores_for(ds, scores_path, system=None):
    if scores_path is not None:
        return load_scores(scores_path, ds).scores
    if system is not None and system.f0 is not None:
        return system.f0.score(ds.features)
    raise CliError("expensive-model scores needed: pass --f0-scores")


def cmd_adapt(args):
    ds = _dataset_from(args)
    cfg, kv = _config_from(args)
    trainer = args.trainer or kv.get("trainer", "adapt_lin")
    s0 = _f0_scores_for(ds, args.f0_scores)
    system = train_cell(trainer, ds, s0, cfg)
    f0 = load_model(args.f0_model) if args.f0_model else None
    system = dataclasses.replace(system, f0=f0, f0_reference=args.f0_model)
    save_system(system, args.out)
    ev = evaluate(system, ds, s0)
    _emit(command="adapt", trainer=trainer, system=args.out, accuracy=ev.accuracy,
          avg_cost=ev.avg_cost, f0_fraction=ev.f0_fraction)


def cmd_sweep(args):
    kv = read_kv(args.config) if args.config else {}
    grid_kv = {k: kv[k] for k in ("gammas", "p_fulls", "shrinkages") if k in kv}
    for k in ("gammas", "p_fulls", "shrinkages"):
        if getattr(args, k):
            grid_kv[k] = getattr(args, k)
    grid = config_from_kv(grid_kv, SweepGrid)
    cfg, kv = _config_from(args)
    trainer = args.trainer or kv.get("trainer", "adapt_lin")
    seed = args.master_seed if args.master_seed is not None else int(kv.get("master_seed", 0))
    train = _dataset_from(args, "train")
    val = _dataset_from(args, "val") or train
    test = _dataset_from(args, "test")
    splits = Splits(train, load_scores(args.train_f0, train).scores,
                    val, load_scores(args.val_f0 or args.train_f0, val).scores,
                    test, None if test is None else load_scores(args.test_f0, test).scores)
    points = sweep(trainer, splits, grid, cfg, master_seed=seed, n_jobs=args.jobs)
    export_curve(points, args.points_out, gnuplot=args.gnuplot)
    frontier = pareto_frontier(points)
    summary = dict(command="sweep", trainer=trainer, cells=len(points),
                   failed=sum(not p.ok for p in points), frontier=len(frontier),
                   points=args.points_out)
    if args.frontier_out:
        export_curve(frontier, args.frontier_out, gnuplot=args.gnuplot)
        summary["frontier_file"] = args.frontier_out
    if test is not None:
        tested = evaluate_on_test(frontier, splits)
        if args.test_out:
            export_curve(tested, args.test_out)
            summary["test_file"] = args.test_out
        summary["test"] = [[p.avg_cost, p.accuracy] for p in tested]
    _emit(**summary)


def cmd_eval(args):
    ds = _dataset_from(args)
    system = load_system(args.system)
    s0 = _f0_scores_for(ds, args.f0_scores, system)
    ev = evaluate(system, ds, s0)
    if args.report:
        write_report(ev, args.report)
    _emit(command="eval", accuracy=ev.accuracy, avg_cost=ev.avg_cost, f0_fraction=ev.f0_fraction,
          report=args.report)


def cmd_frontier(args):
    points = load_curve(args.points)
    frontier = pareto_frontier(points)
    export_curve(frontier, args.out, gnuplot=args.gnuplot)
    summary = dict(command="frontier", points=len(points), frontier=len(frontier), out=args.out)
    if args.budget is not None:
        best = pick_budget(frontier, args.budget)
        summary["pick"] = {"cost": best.avg_cost, "accuracy": best.accuracy,
                           "gamma": best.config.gamma, "p_full": best.config.p_full,
                           "trainer": best.trainer}
    _emit(**summary)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="adaptapprox", description="Train budget-adaptive gated prediction systems.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("which", choices=("1", "2"))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-samples", type=int, default=1000, help="size of synthetic set 1")
    p.add_argument("--split", help="train,validation,test fractions, e.g. 0.6,0.2,0.2")
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-f0", help="train the unconstrained boosted model and write scores")
    _add_data_args(p)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--model-out", required=True)
    p.add_argument("--scores-out", help="scores of the training data")
    p.add_argument("--apply", nargs=2, action="append", metavar=("DATA_DIR", "SCORES_OUT"),
                   help="also score another dataset directory (repeatable)")
    p.set_defaults(func=cmd_train_f0)

    p = sub.add_parser("adapt", help="train one system")
    _add_data_args(p)
    p.add_argument("--trainer", choices=TRAINERS)
    p.add_argument("--f0-scores", required=True)
    p.add_argument("--f0-model", help="expensive model file referenced by the saved system")
    p.add_argument("--out", required=True, help="system bundle to write")
    _add_config_args(p)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("sweep", help="grid sweep, validation frontier, optional test scoring")
    p.add_argument("--trainer", choices=TRAINERS)
    _add_data_args(p, "train")
    _add_data_args(p, "val", required=False)
    _add_data_args(p, "test", required=False)
    p.add_argument("--train-f0", required=True)
    p.add_argument("--val-f0")
    p.add_argument("--test-f0")
    p.add_argument("--gammas", help="comma-separated")
    p.add_argument("--p-fulls", dest="p_fulls", help="comma-separated")
    p.add_argument("--shrinkages", help="comma-separated")
    p.add_argument("--master-seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--points-out", required=True)
    p.add_argument("--frontier-out")
    p.add_argument("--test-out")
    p.add_argument("--gnuplot", action="store_true")
    _add_config_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate a saved system")
    p.add_argument("--system", required=True)
    _add_data_args(p)
    p.add_argument("--f0-scores")
    p.add_argument("--report", help="per-example CSV report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("frontier", help="Pareto frontier of a points CSV")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=float)
    p.add_argument("--gnuplot", action="store_true")
    p.set_defaults(func=cmd_frontier)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep" and args.test is not None and args.test_f0 is None:
        _fail("UsageError", "--test needs --test-f0", code=2)
    try:
        args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        _fail(type(exc).__name__, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
