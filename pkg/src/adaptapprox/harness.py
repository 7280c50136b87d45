"""Parameter sweeps, Pareto frontiers and tradeoff-curve files."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adapt import AdaptConfig, adapt_gbrt, adapt_lin, adapt_lstsq, l1_system
from .dataset import Dataset
from .gating import AdaptiveSystem, evaluate
from .linear import train_l1_logistic
from .trees import TreeEnsemble, greedy_miser

log = logging.getLogger(__name__)

TRAINERS = ("adapt_lin", "adapt_gbrt", "adapt_lstsq", "l1_baseline", "greedy_miser")
CURVE_COLUMNS = ("cost", "accuracy", "f0_fraction", "gamma", "p_full", "shrinkage", "trainer")


class SweepError(RuntimeError):
    """Every cell of a sweep failed."""


class BudgetError(ValueError):
    """No frontier point fits the requested budget."""


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid over ``(gamma, p_full, shrinkage)``; defaults are 20 x 9 x 1."""

    gammas: tuple = tuple(np.logspace(-4, 0, 20))
    p_fulls: tuple = tuple(np.round(np.linspace(0.1, 0.9, 9), 10))
    shrinkages: tuple = (0.1,)

    def __post_init__(self):
        for name in ("gammas", "p_fulls", "shrinkages"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if any(not g > 0 for g in self.gammas):
            raise ValueError("gammas must be positive")
        if any(not 0.0 <= p <= 1.0 for p in self.p_fulls):
            raise ValueError("p_fulls must lie in [0, 1]")
        if any(not 0.0 < s <= 1.0 for s in self.shrinkages):
            raise ValueError("shrinkages must lie in (0, 1]")

    def cells(self) -> list:
        """``(gamma, p_full, shrinkage)`` triples in row-major order."""
        return [(g, p, s) for g in self.gammas for p in self.p_fulls for s in self.shrinkages]

    def __len__(self):
        return len(self.gammas) * len(self.p_fulls) * len(self.shrinkages)


@dataclass(frozen=True, eq=False)
class TradeoffPoint:
    """One evaluated configuration; ``error`` is set (and metrics are NaN) when training failed."""

    avg_cost: float
    accuracy: float
    f0_fraction: float
    config: AdaptConfig
    trainer: str
    split: str = "validation"
    system: AdaptiveSystem | None = field(default=None, repr=False)
    index: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class Splits:
    """Train/validation(/test) datasets with aligned expensive-model scores."""

    train: Dataset
    train_f0: np.ndarray
    validation: Dataset
    validation_f0: np.ndarray
    test: Dataset | None = None
    test_f0: np.ndarray | None = None

    def __post_init__(self):
        for ds_name, sc_name in (("train", "train_f0"), ("validation", "validation_f0"),
                                 ("test", "test_f0")):
            ds, sc = getattr(self, ds_name), getattr(self, sc_name)
            if ds is None:
                continue
            if sc is None:
                raise ValueError(f"missing f0 scores for the {ds_name} split")
            sc = np.asarray(getattr(sc, "scores", sc), dtype=float)
            if sc.shape != (ds.n_examples,):
                raise ValueError(f"{ds_name}: {sc.shape[0]} scores for {ds.n_examples} examples")
            object.__setattr__(self, sc_name, sc)

    @classmethod
    def single(cls, ds: Dataset, f0_scores) -> "Splits":
        """Train and validate on the same data (tiny synthetic sets)."""
        return cls(ds, f0_scores, ds, f0_scores)


def perfect_scores(ds: Dataset, margin: float = 5.0) -> np.ndarray:
    """Score table of an expensive model that classifies every example correctly."""
    return margin * ds.labels.astype(float)


def cell_seed(master_seed: int, index: int) -> int:
    """Deterministic per-cell seed derived from ``(master_seed, index)``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def l1_c_for_gamma(gamma: float, n_examples: int) -> float:
    """Inverse-regularization ``c`` matching a mean-loss L1 weight ``gamma``."""
    return 1.0 / (n_examples * gamma)


def train_cell(trainer: str, ds: Dataset, f0_scores, cfg: AdaptConfig) -> AdaptiveSystem:
    """Train one system for ``cfg``.

    ``l1_baseline`` reads ``gamma`` as its L1 weight and ``p_full`` as the
    class weight of its gate; ``greedy_miser`` ignores ``p_full`` and never
    routes to the expensive model.
    """
    if trainer == "adapt_lin":
        return adapt_lin(ds, f0_scores, cfg)[0]
    if trainer == "adapt_gbrt":
        return adapt_gbrt(ds, f0_scores, cfg)[0]
    if trainer == "adapt_lstsq":
        return adapt_lstsq(ds, f0_scores, cfg)[0]
    if trainer == "l1_baseline":
        w = train_l1_logistic(ds, l1_c_for_gamma(cfg.gamma, ds.n_examples)).weights
        support = [a for a in range(ds.n_features) if w[a] != 0]
        return l1_system(ds, support, cfg.p_full)
    if trainer == "greedy_miser":
        n_trees = (cfg.T if cfg.init_trees is None else cfg.init_trees) + cfg.T * cfg.outer_iters
        f1 = greedy_miser(ds, n_trees, cfg.depth, cfg.shrinkage, cfg.gamma)
        g = TreeEnsemble((), cfg.shrinkage, 0.0, ds.n_features)
        return AdaptiveSystem(g, f1, info={"trainer": "greedy_miser", **cfg.as_dict()})
    raise ValueError(f"unknown trainer {trainer!r}; expected one of {TRAINERS}")


def evaluate_point(system: AdaptiveSystem, ds: Dataset, f0_scores, cfg: AdaptConfig,
                   trainer: str, split: str, index: int) -> TradeoffPoint:
    ev = evaluate(system, ds, f0_scores)
    return TradeoffPoint(ev.avg_cost, ev.accuracy, ev.f0_fraction, cfg, trainer, split, system, index)


def _run_cell(args) -> TradeoffPoint:
    trainer, splits, cfg, index = args
    try:
        system = train_cell(trainer, splits.train, splits.train_f0, cfg)
        return evaluate_point(system, splits.validation, splits.validation_f0, cfg, trainer,
                              "validation", index)
    except Exception as exc:  # a failed cell is recorded, not fatal
        log.warning("sweep cell %d (%s) failed: %s", index, trainer, exc)
        nan = float("nan")
        return TradeoffPoint(nan, nan, nan, cfg, trainer, "validation", None, index,
                             f"{type(exc).__name__}: {exc}")


def sweep(trainer: str, splits: Splits, grid: SweepGrid, base_config: AdaptConfig | None = None,
          *, master_seed: int = 0, n_jobs: int = 1) -> list:
    """Train one system per grid cell and evaluate it on the validation split.

    Cell ``i`` runs with seed :func:`cell_seed` ``(master_seed, i)``. Failed
    cells come back as points with ``error`` set; if every cell fails a
    :class:`SweepError` is raised.
    """
    if trainer not in TRAINERS:
        raise ValueError(f"unknown trainer {trainer!r}; expected one of {TRAINERS}")
    base = base_config if base_config is not None else AdaptConfig()
    jobs = [(trainer, splits, base.with_(gamma=g, p_full=p, shrinkage=s, seed=cell_seed(master_seed, i)), i)
            for i, (g, p, s) in enumerate(grid.cells())]
    if n_jobs == 1 or len(jobs) == 1:
        points = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=None if n_jobs < 1 else n_jobs) as pool:
            points = list(pool.map(_run_cell, jobs))
    points.sort(key=lambda p: p.index)
    if not any(p.ok for p in points):
        raise SweepError(f"all {len(points)} sweep cells failed; first error: {points[0].error}")
    return points


def pareto_frontier(points) -> list:
    """Non-dominated points by (lower cost, higher accuracy), cheapest first.

    Exact duplicates keep the one with the lowest ``index``; failed points
    are ignored.
    """
    pts = [p for p in points if p.ok]
    if not pts:
        raise ValueError("pareto_frontier needs at least one successful point")
    pts.sort(key=lambda p: (p.avg_cost, -p.accuracy, p.index))
    out = []
    for p in pts:
        if out and p.accuracy <= out[-1].accuracy:
            continue
        out.append(p)
    return out


def pick_budget(frontier, budget: float) -> TradeoffPoint:
    """Most accurate point whose average cost is within ``budget``."""
    feasible = [p for p in frontier if p.ok and p.avg_cost <= budget]
    if not feasible:
        raise BudgetError(f"no point with average cost <= {budget}")
    return min(feasible, key=lambda p: (-p.accuracy, p.avg_cost, p.index))


def evaluate_on_test(frontier, splits: Splits) -> list:
    """Re-score frontier systems on the test split."""
    if splits.test is None:
        raise ValueError("splits carry no test set")
    out = []
    for p in frontier:
        if p.system is None:
            raise ValueError(f"point {p.index} carries no trained system")
        out.append(evaluate_point(p.system, splits.test, splits.test_f0, p.config, p.trainer,
                                  "test", p.index))
    return out


def export_curve(points, path, *, gnuplot: bool = False):
    """Write successful points as CSV; optionally a gnuplot script next to it."""
    pts = [p for p in points if p.ok]
    if not pts:
        raise ValueError("nothing to export")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for p in pts:
            c = p.config
            w.writerow([repr(float(p.avg_cost)), repr(float(p.accuracy)), repr(float(p.f0_fraction)),
                        repr(float(c.gamma)), repr(float(c.p_full)), repr(float(c.shrinkage)), p.trainer])
    if gnuplot:
        script = path.with_suffix(".gp")
        script.write_text(
            "set datafile separator ','\n"
            "set xlabel 'average feature cost'\n"
            "set ylabel 'accuracy'\n"
            "set key bottom right\n"
            f"plot '{path.name}' every ::1 using 1:2 with linespoints title 'tradeoff'\n")
    return path


def load_curve(path) -> list:
    """Read a CSV written by :func:`export_curve`; ``index`` is the row order."""
    out = []
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CURVE_COLUMNS:
        raise ValueError(f"{path}: expected header {','.join(CURVE_COLUMNS)}")
    for i, row in enumerate(rows[1:]):
        if len(row) != len(CURVE_COLUMNS):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields")
        cost, acc, frac, gamma, p_full, shrink = (float(v) for v in row[:6])
        cfg = AdaptConfig(gamma=gamma, p_full=p_full, shrinkage=shrink)
        out.append(TradeoffPoint(cost, acc, frac, cfg, row[6], "validation", None, i))
    return out
