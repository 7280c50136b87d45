"""Datasets with per-feature acquisition costs, score tables and splits.

Wire format (all comma separated, '.' decimal, header row optional):

* feature CSV: N rows by K numeric columns, optionally with the label as a
  trailing (or any designated) column;
* label file: N lines, one label each, in {0, 1} or {-1, +1};
* cost file: K lines, one non-negative real each;
* score file: N lines, one real each.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    """Malformed or inconsistent dataset input."""


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _normalize_labels(labels):
    labels = np.asarray(labels, dtype=float).ravel()
    values = set(np.unique(labels).tolist())
    if values <= {0.0, 1.0}:
        labels = 2.0 * labels - 1.0
    elif not values <= {-1.0, 1.0}:
        raise DatasetError(f"labels must be in {{0,1}} or {{-1,+1}}, got {sorted(values)[:5]}")
    return labels.astype(np.int64)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, binary labels in {-1,+1} and per-feature costs.

    ``features[i, a]`` is feature ``a`` of example ``i``; ``costs[a]`` is the
    price paid once per example to acquire feature ``a``.
    """

    features: np.ndarray
    labels: np.ndarray
    costs: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DatasetError(f"features must be a non-empty N x K matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features contain non-finite values")
        y = np.asarray(self.labels).ravel()
        if y.shape[0] != X.shape[0]:
            raise DatasetError(f"{y.shape[0]} labels for {X.shape[0]} examples")
        if not np.all(np.isin(y, (-1, 1))):
            raise DatasetError("labels must be -1 or +1")
        c = np.asarray(self.costs, dtype=float).ravel()
        if c.shape[0] != X.shape[1]:
            raise DatasetError(f"{c.shape[0]} costs for {X.shape[1]} features")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise DatasetError("costs must be finite and non-negative")
        object.__setattr__(self, "features", _readonly(X))
        object.__setattr__(self, "labels", _readonly(y.astype(np.int64)))
        object.__setattr__(self, "costs", _readonly(c))

    @property
    def n_examples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def __len__(self):
        return self.n_examples

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.costs)

    def feature_cost(self, features) -> float:
        """Total acquisition cost of a set of feature indices."""
        idx = np.fromiter(sorted(set(features)), dtype=np.int64)
        return float(self.costs[idx].sum()) if idx.size else 0.0

    def equals(self, other: "Dataset") -> bool:
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.costs, other.costs)
        )


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Margin scores of a fixed model, one per example.

    The probability of label +1 is ``sigmoid(score)``.
    """

    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=float).ravel()
        if not np.all(np.isfinite(s)):
            raise DatasetError("scores contain non-finite values")
        object.__setattr__(self, "scores", _readonly(s))

    def __len__(self):
        return self.scores.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.scores, dtype=dtype)

    def subset(self, rows) -> "ScoreTable":
        return ScoreTable(self.scores[np.asarray(rows, dtype=np.int64)])

    def check_aligned(self, ds: Dataset):
        if len(self) != ds.n_examples:
            raise DatasetError(f"{len(self)} scores for {ds.n_examples} examples")
        return self


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.6, 0.2, 0.2)
    seed: int = 0

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if len(fr) != 3 or any(f < 0 or f > 1 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
            raise DatasetError(f"split fractions must be three values in [0,1] summing to 1, got {fr}")
        object.__setattr__(self, "fractions", fr)


# --------------------------------------------------------------------------
# file I/O
# --------------------------------------------------------------------------


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _read_csv_matrix(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(t.strip() for t in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    if not all(_is_number(t) for t in rows[0]):
        rows = rows[1:]
    try:
        M = np.array([[float(t) for t in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DatasetError(f"{path}: non-numeric entry ({exc})") from None
    if M.ndim != 2:
        raise DatasetError(f"{path}: ragged rows")
    return M


def _read_column(path):
    M = _read_csv_matrix(path)
    if M.shape[1] != 1:
        raise DatasetError(f"{path}: expected one value per line, got {M.shape[1]} columns")
    return M[:, 0]


def load_dataset(feature_path, labels="last", cost_path=None) -> Dataset:
    """Read a dataset from CSV files.

    ``labels`` is either a path to a label file or a column designator of the
    feature CSV (an integer index, or ``"last"``). Without ``cost_path`` every
    feature costs 1.
    """
    M = _read_csv_matrix(feature_path)
    if isinstance(labels, os.PathLike) or (isinstance(labels, str) and labels != "last"):
        X = M
        y = _read_column(labels)
    else:
        col = M.shape[1] - 1 if labels == "last" else int(labels)
        if M.shape[1] < 2:
            raise DatasetError(f"{feature_path}: need at least one feature column besides the label")
        y = M[:, col]
        X = np.delete(M, col, axis=1)
    if y.shape[0] != X.shape[0]:
        raise DatasetError(f"{y.shape[0]} labels for {X.shape[0]} examples")
    if not np.all(np.isfinite(y)):
        raise DatasetError("labels contain non-finite values")
    y = _normalize_labels(y)
    if cost_path is None:
        c = np.ones(X.shape[1])
    else:
        c = _read_column(cost_path)
        if c.shape[0] != X.shape[1]:
            raise DatasetError(f"cost file has {c.shape[0]} entries for {X.shape[1]} features")
    return Dataset(X, y, c)


def _fmt(x):
    return repr(float(x))


def save_dataset(ds: Dataset, feature_path, label_path, cost_path=None):
    """Write ``ds`` so that :func:`load_dataset` reads it back bit-exactly."""
    with open(feature_path, "w") as fh:
        for row in ds.features:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    with open(label_path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in ds.labels)
    if cost_path is not None:
        with open(cost_path, "w") as fh:
            fh.writelines(_fmt(v) + "\n" for v in ds.costs)


def load_scores(path, dataset: Dataset) -> ScoreTable:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        s = np.array([float(ln) for ln in lines])
    except ValueError as exc:
        raise DatasetError(f"{path}: non-numeric score ({exc})") from None
    return ScoreTable(s).check_aligned(dataset)


def save_scores(scores, path):
    with open(path, "w") as fh:
        fh.writelines(_fmt(v) + "\n" for v in np.asarray(scores, dtype=float))


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------


def split_indices(n: int, spec: SplitSpec, require_nonempty: bool = True):
    """Row indices of a (train, validation, test) partition of ``range(n)``.

    Part sizes use largest-remainder rounding, so each is within one of
    ``n * fraction``.
    """
    fr = np.array(spec.fractions)
    raw = n * fr
    sizes = np.floor(raw).astype(int)
    rem = n - sizes.sum()
    order = sorted(range(3), key=lambda k: (-(raw[k] - sizes[k]), k))
    for k in order[:rem]:
        sizes[k] += 1
    if require_nonempty and np.any(sizes == 0):
        raise DatasetError(f"split of {n} rows with fractions {spec.fractions} leaves an empty part")
    perm = np.random.default_rng(spec.seed).permutation(n)
    a, b = sizes[0], sizes[0] + sizes[1]
    return perm[:a], perm[a:b], perm[b:]


def split(ds: Dataset, spec: SplitSpec, require_nonempty: bool = True):
    """Partition ``ds`` into (train, validation, test) datasets."""
    if require_nonempty:
        return tuple(ds.subset(ix) for ix in split_indices(ds.n_examples, spec, True))
    parts = split_indices(ds.n_examples, spec, False)
    return tuple(ds.subset(ix) if ix.size else None for ix in parts)


# --------------------------------------------------------------------------
# synthetic generators
# --------------------------------------------------------------------------

SYNTHETIC2_CENTERS = np.array([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (-1.0, -3.0)])
SYNTHETIC2_SIZES = (20, 20, 15, 15)
SYNTHETIC2_LABELS = (1, -1, 1, -1)


def gen_synthetic2(seed: int = 2) -> Dataset:
    """Four tight clusters on the plane, unit feature costs.

    Clusters 1 and 3 are labelled +1, clusters 2 and 4 are labelled -1, so
    the second coordinate alone separates clusters 3 and 4 while the first
    coordinate alone isolates cluster 1.
    """
    rng = np.random.default_rng(seed)
    X = np.vstack(
        [c + 0.01 * rng.standard_normal((n, 2)) for c, n in zip(SYNTHETIC2_CENTERS, SYNTHETIC2_SIZES)]
    )
    y = np.repeat(SYNTHETIC2_LABELS, SYNTHETIC2_SIZES)
    return Dataset(X, y, np.ones(2))


def synthetic2_cluster_ids() -> np.ndarray:
    """Cluster index (0..3) of every row returned by :func:`gen_synthetic2`."""
    return np.repeat(np.arange(4), SYNTHETIC2_SIZES)


@dataclass(frozen=True, eq=False)
class Synthetic1:
    dataset: Dataset
    clean_labels: np.ndarray = field(repr=False)
    flipped: np.ndarray = field(repr=False)


def gen_synthetic1(seed: int = 17, n_samples: int = 1000, flip_y: float = 0.01, *, details=False):
    """Two Gaussian clusters per class on the corners of a square.

    Class +1 sits at (-1, 1) and (1, 1), class -1 at (-1, -1) and (1, -1).
    Each cluster draws unit-variance normals and mixes them with its own
    random matrix (entries uniform in [-1, 1]), so clusters are elongated
    and tilted. Every label is then flipped independently with probability
    ``flip_y``. With ``details=True`` a :class:`Synthetic1` carrying the
    pre-flip labels is returned instead of the bare dataset.
    """
    rng = np.random.default_rng(seed)
    corners = np.array([(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)])
    corner_labels = np.array([-1, 1, -1, 1])
    sizes = np.full(4, n_samples // 4)
    sizes[: n_samples % 4] += 1
    cid = np.repeat(np.arange(4), sizes)
    X = rng.standard_normal((n_samples, 2))
    for k in range(4):
        mix = 2.0 * rng.random((2, 2)) - 1.0
        X[cid == k] = X[cid == k] @ mix + corners[k]
    clean = corner_labels[cid]
    flipped = rng.random(n_samples) < flip_y
    y = np.where(flipped, -clean, clean)
    perm = rng.permutation(n_samples)
    ds = Dataset(X[perm], y[perm], np.ones(2))
    if details:
        return Synthetic1(ds, _readonly(clean[perm]), _readonly(flipped[perm]))
    return ds
