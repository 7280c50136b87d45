"""Routing between the cheap predictor ``f1`` and the expensive model ``f0``.

Convention: ``z = 0`` routes to ``f0``, ``z = 1`` to ``f1``; ``q_i`` is the
training-time probability ``q(z=0 | x_i)`` and the gate scores ``g`` so that
``Pr(z=0 | x) = sigmoid(g(x))``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from ._numeric import binary_entropy, log_sigmoid, logistic_loss, softplus
from .dataset import Dataset
from .linear import ConvergenceError


@dataclass(frozen=True, eq=False)
class GateAssignment:
    """Soft routing ``q`` (probability of the expensive model) and dual value ``beta``."""

    q: np.ndarray
    beta: float = 0.0
    p_full: float | None = None

    def __post_init__(self):
        q = np.array(self.q, dtype=float).ravel()
        if np.any(q < 0) or np.any(q > 1) or not np.all(np.isfinite(q)):
            raise ValueError("q entries must lie in [0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.p_full is not None and q.mean() > self.p_full + 1e-6:
            raise ValueError(f"mean(q)={q.mean():.6g} exceeds p_full={self.p_full}")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "beta", float(self.beta))

    def __len__(self):
        return self.q.shape[0]

    @property
    def fraction(self) -> float:
        return float(self.q.mean())


@dataclass(frozen=True, eq=False)
class LossTerms:
    """Per-example costs of routing to ``f1`` (``A``) and to ``f0`` (``B``)."""

    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class OracleGateConfig:
    eta: float = 1.0


@dataclass(frozen=True, eq=False)
class AdaptiveSystem:
    """Gate ``g`` plus cheap predictor ``f1`` in front of an expensive model.

    ``f0`` is an optional scoring model (anything with ``score(X)``); without
    it, ``f0`` scores are supplied at evaluation time. ``f0_used_features``
    defaults to every feature.
    """

    g: object
    f1: object
    f0: object = None
    f0_used_features: frozenset | None = None
    route_threshold: float = 0.0
    f0_reference: str | None = None
    info: dict | None = None

    def f0_features(self, n_features: int) -> frozenset:
        if self.f0_used_features is None:
            return frozenset(range(n_features))
        return frozenset(self.f0_used_features)

    def gate(self, X) -> np.ndarray:
        """Routing decisions: 0 for the expensive model, 1 for ``f1``."""
        return np.where(self.g.score(X) > self.route_threshold, 0, 1)

    def f0_scores(self, X, f0_scores=None) -> np.ndarray:
        if f0_scores is not None:
            return np.asarray(f0_scores, dtype=float)
        if self.f0 is None:
            raise ValueError("no f0 model attached; pass f0 scores explicitly")
        return self.f0.score(X)


def _arr(s):
    return np.asarray(getattr(s, "scores", s), dtype=float)


def compute_loss_terms(labels, f1_scores, g_scores, f0_scores) -> LossTerms:
    """``A = l(f1) + softplus(g)`` and ``B = l(f0) + softplus(-g)`` per example."""
    y = np.asarray(labels, dtype=float)
    s1, sg, s0 = _arr(f1_scores), _arr(g_scores), _arr(f0_scores)
    if not (y.shape == s1.shape == sg.shape == s0.shape):
        raise ValueError("labels and score tables must be aligned")
    A = logistic_loss(y * s1) + softplus(sg)
    B = logistic_loss(y * s0) + softplus(-sg)
    return LossTerms(A, B)


def opt1_objective(terms: LossTerms, q) -> float:
    q = np.asarray(getattr(q, "q", q), dtype=float)
    return float(np.mean((1.0 - q) * terms.A + q * terms.B - binary_entropy(q)))


def _q_of_beta(diff, beta):
    # q_i = 1 / (1 + exp(B_i - A_i + beta)), diff = A - B
    return 0.5 * (1.0 + np.tanh(0.5 * (diff - beta)))


def solve_opt1(terms: LossTerms, p_full: float, tol: float = 1e-8) -> GateAssignment:
    """Entropy-regularized routing under the budget ``mean(q) <= p_full``.

    The minimizer is ``q_i = sigmoid(A_i - B_i - beta)`` with the smallest
    ``beta >= 0`` meeting the budget, found by bisection; the returned ``q``
    is always on the feasible side.
    """
    if not 0.0 <= p_full <= 1.0:
        raise ValueError("p_full must lie in [0, 1]")
    diff = np.asarray(terms.A, dtype=float) - np.asarray(terms.B, dtype=float)
    q0 = _q_of_beta(diff, 0.0)
    if q0.mean() <= p_full:
        return GateAssignment(q0, 0.0, p_full)
    hi = max(float(diff.max()), 0.0) + 50.0
    if p_full == 0.0:
        return GateAssignment(np.zeros_like(diff), hi, p_full)
    while _q_of_beta(diff, hi).mean() > p_full:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _q_of_beta(diff, mid).mean() > p_full:
            lo = mid
        else:
            hi = mid
    q = _q_of_beta(diff, hi)
    if abs(q.mean() - p_full) > tol:
        raise ConvergenceError(f"budget bisection stalled at |mean(q) - p_full| = {abs(q.mean() - p_full):.3g}")
    return GateAssignment(q, hi, p_full)


def oracle_gate(excess_loss: float, cost_reduction: float, config: OracleGateConfig | float) -> int:
    """Idealized routing: ``f1`` (1) iff its excess loss is at most ``eta`` times
    the cost it saves, otherwise ``f0`` (0)."""
    eta = config.eta if isinstance(config, OracleGateConfig) else float(config)
    return 1 if excess_loss <= eta * cost_reduction else 0


def route(system: AdaptiveSystem, x, f0_score: float | None = None):
    """Route one example; returns ``(z, predicted label)``.

    A zero score predicts +1.
    """
    x = np.asarray(x, dtype=float)[None, :]
    z = int(system.gate(x)[0])
    if z == 0:
        s = float(system.f0_scores(x, None if f0_score is None else [f0_score])[0])
    else:
        s = float(system.f1.score(x)[0])
    return z, (1 if s >= 0 else -1)


def system_cost(system: AdaptiveSystem, ds: Dataset):
    """Average feature cost, fraction routed to ``f0`` and per-example costs.

    An example pays for the union of the gate's features and the features
    of the model it is routed to.
    """
    K = ds.n_features
    g_used = frozenset(system.g.used_features)
    cost1 = ds.feature_cost(g_used | frozenset(system.f1.used_features))
    cost0 = ds.feature_cost(g_used | system.f0_features(K))
    z = system.gate(ds.features)
    per = np.where(z == 0, cost0, cost1).astype(float)
    return float(per.mean()), float(np.mean(z == 0)), per


@dataclass(frozen=True, eq=False)
class Evaluation:
    accuracy: float
    avg_cost: float
    f0_fraction: float
    z: np.ndarray
    costs: np.ndarray
    correct: np.ndarray


def evaluate(system: AdaptiveSystem, ds: Dataset, f0_scores=None) -> Evaluation:
    """Hard-route every example and score accuracy and feature cost."""
    X = ds.features
    z = system.gate(X)
    s0 = system.f0_scores(X, None if f0_scores is None else _arr(f0_scores))
    if s0.shape[0] != ds.n_examples:
        raise ValueError("f0 scores not aligned with the dataset")
    s = np.where(z == 0, s0, system.f1.score(X))
    pred = np.where(s >= 0, 1, -1)
    correct = pred == ds.labels
    avg, frac, per = system_cost(system, ds)
    return Evaluation(float(correct.mean()), avg, frac, z, per, correct)


def write_report(ev: Evaluation, path):
    """CSV with columns (example id, z, cost, correct)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["example_id", "z", "cost", "correct"])
        for i, (z, c, ok) in enumerate(zip(ev.z, ev.costs, ev.correct)):
            w.writerow([i, int(z), repr(float(c)), int(ok)])


def jensen_gap(q, g_scores, f1_scores, f0_scores, labels) -> np.ndarray:
    """Slack of the bound ``-log Pr(y|x) <= E_q loss + KL(q || Pr(z|x; g))``.

    ``Pr(y|x) = sigmoid(g) p(y|f0) + sigmoid(-g) p(y|f1)``; every entry is
    non-negative up to rounding and zero when ``q`` is the posterior of
    ``z = 0``.
    """
    q = np.clip(np.asarray(getattr(q, "q", q), dtype=float), 0.0, 1.0)
    y = np.asarray(labels, dtype=float)
    sg, s1, s0 = _arr(g_scores), _arr(f1_scores), _arr(f0_scores)
    l0, l1 = logistic_loss(y * s0), logistic_loss(y * s1)
    lg0, lg1 = log_sigmoid(sg), log_sigmoid(-sg)
    log_marginal = np.logaddexp(lg0 - l0, lg1 - l1)
    kl = xlogy(q, q) - q * lg0 + xlogy(1.0 - q, 1.0 - q) - (1.0 - q) * lg1
    return q * l0 + (1.0 - q) * l1 + kl + log_marginal


def posterior_q(g_scores, f1_scores, f0_scores, labels) -> np.ndarray:
    """Posterior probability of ``z = 0`` given ``(x, y)`` under the composite model."""
    y = np.asarray(labels, dtype=float)
    sg, s1, s0 = _arr(g_scores), _arr(f1_scores), _arr(f0_scores)
    a = log_sigmoid(sg) - logistic_loss(y * s0)
    b = log_sigmoid(-sg) - logistic_loss(y * s1)
    return np.exp(a - np.logaddexp(a, b))

