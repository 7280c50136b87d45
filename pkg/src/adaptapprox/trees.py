"""Depth-limited regression trees with a feature-acquisition penalty, and
boosted ensembles built from them.

A candidate split on feature ``a`` is worth ``SSE_reduction / 2 -
gamma * c_a`` when ``a`` has not been acquired yet (neither by earlier trees
nor higher up in the tree being grown) and ``SSE_reduction / 2`` otherwise.
Splits with non-positive worth are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numeric import logistic_loss, sigmoid
from .dataset import Dataset

LEAF = -1


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Binary tree stored in preorder.

    ``feature[k] == LEAF`` marks a leaf with output ``value[k]``; otherwise
    rows with ``x[feature[k]] <= threshold[k]`` go to ``left[k]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    left: np.ndarray
    right: np.ndarray
    max_depth: int

    def __post_init__(self):
        for name, dt in (("feature", np.int64), ("threshold", float), ("value", float),
                         ("left", np.int64), ("right", np.int64)):
            a = np.array(getattr(self, name), dtype=dt)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def leaf(cls, value: float, max_depth: int = 0) -> "RegressionTree":
        return cls([LEAF], [0.0], [value], [LEAF], [LEAF], max_depth)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def used_features(self) -> frozenset:
        return frozenset(int(a) for a in self.feature[self.feature != LEAF])

    @property
    def depth(self) -> int:
        def walk(k):
            if self.feature[k] == LEAF:
                return 0
            return 1 + max(walk(self.left[k]), walk(self.right[k]))
        return walk(0)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while np.any(active):
            r = rows[active]
            k = node[r]
            go_left = X[r, self.feature[k]] <= self.threshold[k]
            node[r] = np.where(go_left, self.left[k], self.right[k])
            active = self.feature[node] != LEAF
        return self.value[node]


@dataclass(frozen=True, eq=False)
class FeatureUsage:
    """``u[a] == 1`` while feature ``a`` has not been acquired by any tree."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=np.int8)
        if not np.all((u == 0) | (u == 1)):
            raise ValueError("usage entries must be 0 or 1")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def fresh(cls, n_features: int) -> "FeatureUsage":
        return cls(np.ones(n_features, dtype=np.int8))

    @classmethod
    def from_used(cls, n_features: int, used) -> "FeatureUsage":
        return cls.fresh(n_features).mark_used(used)

    def mark_used(self, features) -> "FeatureUsage":
        u = self.u.copy()
        u[list(features)] = 0
        return FeatureUsage(u)


# --------------------------------------------------------------------------
# tree induction
# --------------------------------------------------------------------------


_TIE_RTOL = 1e-12


def _best_split_for_feature(x, r):
    """Best squared-error split of one feature: (reduction, threshold) or None.

    Candidate thresholds are midpoints between consecutive distinct values;
    among equal reductions the lowest threshold wins.
    """
    order = np.argsort(x, kind="stable")
    xs, rs = x[order], r[order]
    n = xs.shape[0]
    valid = xs[1:] > xs[:-1]
    if not np.any(valid):
        return None
    cs = np.cumsum(rs)[:-1]
    total = rs.sum()
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    mean_l = cs / nl
    mean_r = (total - cs) / nr
    red = nl * nr / n * (mean_l - mean_r) ** 2
    red = np.where(valid, red, -np.inf)
    top = red.max()
    # mathematically equal reductions can differ in the last bits here
    i = int(np.flatnonzero(red >= top - _TIE_RTOL * abs(top))[0])
    lo, hi = xs[i], xs[i + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return red[i], thr


def _min_gain(r):
    # guards against accepting splits whose gain is pure rounding noise
    return 1e-12 * (float(np.dot(r, r)) + 1e-300)


def fit_cart(features, targets, depth: int, gamma: float = 0.0, costs=None,
             usage: FeatureUsage | None = None) -> RegressionTree:
    """Grow a regression tree on ``targets`` by greedy top-down induction.

    Children are grown depth-first, left before right, so a feature first
    used in a left subtree is free in the right subtree. Ties in net gain go
    to the lower feature index, then the lower threshold.
    """
    X = np.asarray(features, dtype=float)
    r_all = np.asarray(targets, dtype=float)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not np.all(np.isfinite(r_all)):
        raise ValueError("targets must be finite")
    N, K = X.shape
    costs = np.zeros(K) if costs is None else np.asarray(costs, dtype=float)
    unused = np.ones(K, dtype=bool) if usage is None else usage.u.astype(bool).copy()
    charge = gamma * costs

    feat, thr, val, left, right = [], [], [], [], []

    def grow(rows, level):
        k = len(feat)
        r = r_all[rows]
        feat.append(LEAF)
        thr.append(0.0)
        val.append(float(r.mean()))
        left.append(LEAF)
        right.append(LEAF)
        if level >= depth or rows.shape[0] < 2:
            return
        best = None
        floor = _min_gain(r)
        for a in range(K):
            found = _best_split_for_feature(X[rows, a], r)
            if found is None:
                continue
            red, t = found
            gain = 0.5 * red - (charge[a] if unused[a] else 0.0)
            if gain > floor and (best is None or gain > best[0] + _TIE_RTOL * abs(best[0])):
                best = (gain, a, t)
        if best is None:
            return
        _, a, t = best
        feat[k], thr[k] = a, t
        unused[a] = False
        mask = X[rows, a] <= t
        left[k] = len(feat)
        grow(rows[mask], level + 1)
        right[k] = len(feat)
        grow(rows[~mask], level + 1)

    grow(np.arange(N), 0)
    return RegressionTree(feat, thr, val, left, right, depth)


# --------------------------------------------------------------------------
# ensembles
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    """``score(x) = base_score + shrinkage * sum_t tree_t(x)``."""

    trees: tuple = ()
    shrinkage: float = 0.1
    base_score: float = 0.0
    n_features: int | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not 0 < self.shrinkage <= 1:
            raise ValueError("shrinkage must lie in (0, 1]")

    @property
    def used_features(self) -> frozenset:
        out = frozenset()
        for t in self.trees:
            out |= t.used_features
        return out

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        s = np.zeros(X.shape[0])
        for t in self.trees:
            s += t.predict(X)
        return self.base_score + self.shrinkage * s

    def add(self, tree: RegressionTree) -> "TreeEnsemble":
        return TreeEnsemble(self.trees + (tree,), self.shrinkage, self.base_score, self.n_features)


def predict(ensemble: TreeEnsemble, x) -> float:
    """Score of a single example."""
    return float(ensemble.score(np.asarray(x, dtype=float)[None, :])[0])


def logistic_training_loss(scores, labels) -> float:
    return float(np.mean(logistic_loss(np.asarray(labels) * scores)))


def _prior_log_odds(y):
    p = np.mean(y > 0)
    if p in (0.0, 1.0):
        return 0.0
    return float(np.log(p) - np.log1p(-p))


def greedy_miser(ds: Dataset, T: int, depth: int = 4, shrinkage: float = 0.1, lam: float = 0.0,
                 *, init: TreeEnsemble | None = None, usage: FeatureUsage | None = None,
                 loss_trace: list | None = None) -> TreeEnsemble:
    """Cost-aware boosting on the logistic loss.

    Every round fits one tree to the negative gradient ``y sigmoid(-y F)``
    with the acquisition penalty ``lam * c_a`` on not-yet-used features, then
    marks the tree's features as acquired. ``init``/``usage`` continue an
    existing ensemble. When given, ``loss_trace`` receives the training loss
    before the first and after every round.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    X, y = ds.features, ds.labels.astype(float)
    ens = init if init is not None else TreeEnsemble((), shrinkage, _prior_log_odds(y), ds.n_features)
    if usage is None:
        usage = FeatureUsage.from_used(ds.n_features, ens.used_features)
    F = ens.score(X)
    if loss_trace is not None:
        loss_trace.append(logistic_training_loss(F, y))
    for _ in range(T):
        r = y * sigmoid(-y * F)
        tree = fit_cart(X, r, depth, lam, ds.costs, usage)
        ens = ens.add(tree)
        usage = usage.mark_used(tree.used_features)
        F = F + ens.shrinkage * tree.predict(X)
        if loss_trace is not None:
            loss_trace.append(logistic_training_loss(F, y))
    return ens


def train_gbrt(ds: Dataset, T: int, depth: int = 4, shrinkage: float = 0.1, *,
               loss_trace: list | None = None) -> TreeEnsemble:
    """Cost-blind gradient boosting on the logistic loss (for the expensive model)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return greedy_miser(ds, T, depth, shrinkage, 0.0, loss_trace=loss_trace)
