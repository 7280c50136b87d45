"""Alternating-minimization trainers for adaptive (gate, cheap model) pairs.

All trainers alternate between the routing distribution ``q`` (how much of
each example goes to the expensive model ``f0``) and the models ``g`` and
``f1``:

* :func:`adapt_lin`   -- linear ``g``/``f1``, KL gate fit, group-sparse costs;
* :func:`adapt_gbrt`  -- boosted-tree ``g``/``f1``, KL gate fit, acquisition
  penalty inside the tree impurity;
* :func:`adapt_lstsq` -- linear ``g``/``f1``, squared log-odds gate fit.

:func:`l1_baseline` is the two-step comparison method (sparse support from
L1 logistic regression, then a gate trained on ``f1``'s correctness).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace

import numpy as np

from ._numeric import binary_entropy, logistic_loss, logit, sigmoid, softplus
from .dataset import Dataset
from .gating import AdaptiveSystem, GateAssignment, compute_loss_terms, solve_opt1
from .linear import (
    ConvergenceError,
    JointLinearPair,
    LinearModel,
    _group_shrink,
    _pack,
    _prox_gradient,
    _unpack,
    solve_opt2,
    train_l1_logistic,
    train_logistic,
)
from .trees import FeatureUsage, TreeEnsemble, fit_cart, greedy_miser

log = logging.getLogger(__name__)

Q_CLAMP = 1e-6


class AdaptError(RuntimeError):
    """A subproblem failed inside an alternating-minimization round."""

    def __init__(self, message, round_index=None):
        super().__init__(message)
        self.round_index = round_index


@dataclass(frozen=True)
class AdaptConfig:
    """Knobs shared by the trainers.

    ``init`` picks the starting ``(g, f1)`` of the linear trainers: ``"l2"``
    (``g = 0``, ``f1`` = L2 logistic regression on all features), ``"ones"``
    (all-one weights for both), or ``"random"`` (small Gaussian weights drawn
    from ``seed``). ``init_trees`` is the size of the cost-aware boosting
    warm start of ``f1`` in :func:`adapt_gbrt` (defaults to ``T``).
    """

    gamma: float = 0.0
    p_full: float = 0.5
    outer_iters: int = 10
    T: int = 5
    depth: int = 4
    shrinkage: float = 0.1
    seed: int = 0
    tolerance: float = 1e-6
    init: str = "l2"
    init_trees: int | None = None
    l2_init: float | None = None
    opt5_penalty: float = 1.0

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be at least 1")
        if not 0.0 <= self.p_full <= 1.0:
            raise ValueError("p_full must lie in [0, 1]")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.init not in ("l2", "ones", "random", "zeros"):
            raise ValueError(f"unknown init {self.init!r}")

    def as_dict(self) -> dict:
        return asdict(self)

    def with_(self, **kw) -> "AdaptConfig":
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class ObjectiveTrace:
    """Full objective after every half-step, plus the last routing distribution."""

    values: tuple = ()
    gate: GateAssignment | None = None

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def _scores(s):
    return np.asarray(getattr(s, "scores", s), dtype=float)


def _aligned_f0(ds, f0_scores):
    s0 = _scores(f0_scores)
    if s0.shape != (ds.n_examples,):
        raise ValueError(f"{s0.shape[0]} f0 scores for {ds.n_examples} examples")
    return s0


def _converged(prev, cur, tol):
    return prev is not None and abs(prev - cur) <= tol * max(abs(prev), 1e-12)


# --------------------------------------------------------------------------
# full objective
# --------------------------------------------------------------------------


def feature_penalty(g, f1, costs) -> float:
    """Cost term without ``gamma``: group norm for linear models, acquired cost for trees."""
    costs = np.asarray(costs, dtype=float)
    if isinstance(g, LinearModel) and isinstance(f1, LinearModel):
        return float(np.sum(costs * np.hypot(g.weights, f1.weights)))
    used = sorted(set(g.used_features) | set(f1.used_features))
    return float(costs[used].sum()) if used else 0.0


def full_objective(ds: Dataset, q, g, f1, f0_scores, gamma: float, metric: str = "kl") -> float:
    """Expected routed loss + gate-fit term + ``gamma`` * feature cost term.

    ``metric="kl"`` uses ``KL(q || sigmoid(g))``; ``metric="lstsq"`` uses the
    squared gap between ``logit(q)`` and ``g``.
    """
    q = np.asarray(getattr(q, "q", q), dtype=float)
    y = ds.labels.astype(float)
    X = ds.features
    sg, s1, s0 = g.score(X), f1.score(X), _aligned_f0(ds, f0_scores)
    loss = q * logistic_loss(y * s0) + (1.0 - q) * logistic_loss(y * s1)
    if metric == "kl":
        fit = -binary_entropy(q) + q * softplus(-sg) + (1.0 - q) * softplus(sg)
    elif metric == "lstsq":
        qc = np.clip(q, Q_CLAMP, 1.0 - Q_CLAMP)
        fit = (logit(qc) - sg) ** 2
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return float(np.mean(loss + fit)) + gamma * feature_penalty(g, f1, ds.costs)


# --------------------------------------------------------------------------
# Adapt-Lin
# --------------------------------------------------------------------------


def _linear_init(ds: Dataset, cfg: AdaptConfig) -> JointLinearPair:
    K = ds.n_features
    if cfg.init == "ones":
        return JointLinearPair(LinearModel(np.ones(K)), LinearModel(np.ones(K)))
    if cfg.init == "zeros":
        return JointLinearPair(LinearModel.zeros(K), LinearModel.zeros(K))
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        return JointLinearPair(LinearModel(0.1 * rng.standard_normal(K)),
                               LinearModel(0.1 * rng.standard_normal(K)))
    l2 = cfg.l2_init if cfg.l2_init is not None else 1.0 / ds.n_examples
    return JointLinearPair(LinearModel.zeros(K), train_logistic(ds, l2))


def adapt_lin(ds: Dataset, f0_scores, cfg: AdaptConfig, init: JointLinearPair | None = None):
    """Linear gate and cheap predictor; returns ``(AdaptiveSystem, ObjectiveTrace)``."""
    s0 = _aligned_f0(ds, f0_scores)
    X, y = ds.features, ds.labels.astype(float)
    pair = init if init is not None else _linear_init(ds, cfg)
    values, prev, gate = [], None, None
    for it in range(cfg.outer_iters):
        try:
            terms = compute_loss_terms(y, pair.f1.score(X), pair.g.score(X), s0)
            gate = solve_opt1(terms, cfg.p_full)
            values.append(full_objective(ds, gate, pair.g, pair.f1, s0, cfg.gamma))
            pair = solve_opt2(ds, gate, cfg.gamma, pair)
        except (ConvergenceError, ValueError) as exc:
            raise AdaptError(f"adapt_lin round {it}: {exc}", it) from exc
        cur = full_objective(ds, gate, pair.g, pair.f1, s0, cfg.gamma)
        values.append(cur)
        if _converged(prev, cur, cfg.tolerance):
            break
        prev = cur
    system = AdaptiveSystem(pair.g, pair.f1, info={"trainer": "adapt_lin", **cfg.as_dict()})
    return system, ObjectiveTrace(tuple(values), gate)


# --------------------------------------------------------------------------
# Adapt-Gbrt
# --------------------------------------------------------------------------


def f1_tree_targets(y, q, f1_scores):
    """Negative gradient of the routed loss w.r.t. ``f1`` (per example, unscaled)."""
    return (1.0 - q) * y * sigmoid(-y * f1_scores)


def g_tree_targets(q, g_scores):
    """Negative gradient of the gate-fit loss w.r.t. ``g`` (per example, unscaled)."""
    return q * sigmoid(-g_scores) - (1.0 - q) * sigmoid(g_scores)


def routed_tree_loss(y, q, f1_scores, g_scores) -> float:
    """Smooth part of the joint (g, f1) objective summed over examples."""
    return float(np.sum((1.0 - q) * (logistic_loss(y * f1_scores) + softplus(g_scores))
                        + q * softplus(-g_scores)))


def adapt_gbrt(ds: Dataset, f0_scores, cfg: AdaptConfig, init: tuple | None = None):
    """Boosted-tree gate and cheap predictor.

    ``f1`` starts from cost-aware boosting with ``cfg.init_trees`` rounds
    (penalty ``gamma``) and ``g`` from the zero function. Each outer round
    solves for ``q`` once and then adds ``cfg.T`` trees to each of ``f1`` and
    ``g``, alternating, with the acquisition penalty ``gamma * c_a`` charged
    to features no earlier tree has used.
    """
    s0 = _aligned_f0(ds, f0_scores)
    X, y = ds.features, ds.labels.astype(float)
    K = ds.n_features
    if init is None:
        n0 = cfg.T if cfg.init_trees is None else cfg.init_trees
        f1 = greedy_miser(ds, n0, cfg.depth, cfg.shrinkage, cfg.gamma)
        g = TreeEnsemble((), cfg.shrinkage, 0.0, K)
    else:
        g, f1 = init
    usage = FeatureUsage.from_used(K, g.used_features | f1.used_features)
    sf, sg = f1.score(X), g.score(X)
    values, prev, gate = [], None, None
    for it in range(cfg.outer_iters):
        try:
            terms = compute_loss_terms(y, sf, sg, s0)
            gate = solve_opt1(terms, cfg.p_full)
        except (ConvergenceError, ValueError) as exc:
            raise AdaptError(f"adapt_gbrt round {it}: {exc}", it) from exc
        q = gate.q
        values.append(full_objective(ds, gate, g, f1, s0, cfg.gamma))
        for _ in range(cfg.T):
            tree = fit_cart(X, f1_tree_targets(y, q, sf), cfg.depth, cfg.gamma, ds.costs, usage)
            f1 = f1.add(tree)
            sf = sf + f1.shrinkage * tree.predict(X)
            usage = usage.mark_used(tree.used_features)
            tree = fit_cart(X, g_tree_targets(q, sg), cfg.depth, cfg.gamma, ds.costs, usage)
            g = g.add(tree)
            sg = sg + g.shrinkage * tree.predict(X)
            usage = usage.mark_used(tree.used_features)
        cur = full_objective(ds, gate, g, f1, s0, cfg.gamma)
        values.append(cur)
        if _converged(prev, cur, cfg.tolerance):
            break
        prev = cur
    system = AdaptiveSystem(g, f1, info={"trainer": "adapt_gbrt", **cfg.as_dict()})
    return system, ObjectiveTrace(tuple(values), gate)


# --------------------------------------------------------------------------
# Adapt-Lstsq
# --------------------------------------------------------------------------

_GRID = None


def _grid():
    global _GRID
    if _GRID is None:
        xs = np.concatenate([[Q_CLAMP], np.arange(1e-4, 1.0, 1e-4), [1.0 - Q_CLAMP]])
        _GRID = (xs, logit(xs))
    return _GRID


def opt5_objective(A, g_scores, q) -> float:
    """``mean((1-q) A + (logit(q) - g)^2)``."""
    q = np.clip(np.asarray(getattr(q, "q", q), dtype=float), Q_CLAMP, 1.0 - Q_CLAMP)
    return float(np.mean((1.0 - q) * np.asarray(A) + (logit(q) - _scores(g_scores)) ** 2))


def _phi(x, A, g, lin, rho, v):
    return (1.0 - x) * A + (logit(x) - g) ** 2 + lin * x + 0.5 * rho * (x - v) ** 2


def _argmin_1d(A, g, lin=0.0, rho=0.0, v=0.0):
    """Global minimizer of each ``(1-x) A_i + (logit x - g_i)^2 + lin_i x +
    rho/2 (x - v_i)^2`` over ``[Q_CLAMP, 1 - Q_CLAMP]``: dense grid, then Newton."""
    xs, ls = _grid()
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    g = np.broadcast_to(np.asarray(g, dtype=float), (n,))
    lin = np.broadcast_to(np.asarray(lin, dtype=float), (n,))
    v = np.broadcast_to(np.asarray(v, dtype=float), (n,))
    # drop per-example constants: the grid values reduce to
    # base(x) + c1_i * x + c2_i * logit(x), evaluated as one matrix product
    base = ls * ls + 0.5 * rho * xs * xs
    basis = np.stack([xs, ls])
    coef = np.stack([lin - A - rho * v, -2.0 * g], axis=1)
    out = np.empty(n)
    chunk = max(1, 2_000_000 // xs.shape[0])
    for s in range(0, n, chunk):
        vals = coef[s:s + chunk] @ basis
        vals += base
        out[s:s + chunk] = xs[np.argmin(vals, axis=1)]
    best = _phi(out, A, g, lin, rho, v)
    x = out.copy()
    lo, hi = Q_CLAMP, 1.0 - Q_CLAMP
    for _ in range(30):
        w = x * (1.0 - x)
        r = logit(x) - g
        d1 = -A + 2.0 * r / w + lin + rho * (x - v)
        d2 = 2.0 / w**2 + 2.0 * r * (2.0 * x - 1.0) / w**2 + rho
        step = np.where(d2 > 0, -d1 / np.where(d2 > 0, d2, 1.0), 0.0)
        step = np.clip(step, -0.5 * (x - lo), 0.5 * (hi - x))
        x = np.clip(x + step, lo, hi)
        if np.max(np.abs(step)) < 1e-15:
            break
    val = _phi(x, A, g, lin, rho, v)
    take = val < best
    out[take] = x[take]
    return out


def _project_budget(v, p_full):
    """Euclidean projection onto ``{z in [lo, hi]^N : mean(z) <= p_full}``.

    The projection is ``clip(v - tau)`` for the smallest feasible shift
    ``tau >= 0``; the clipped mean is piecewise linear in ``tau`` with kinks
    at ``v - hi`` and ``v - lo``, so ``tau`` is found exactly by searching
    the kinks and interpolating inside the bracketing segment.
    """
    lo, hi = Q_CLAMP, 1.0 - Q_CLAMP
    v = np.asarray(v, dtype=float)
    z = np.clip(v, lo, hi)
    if z.mean() <= p_full:
        return z
    target = p_full * v.shape[0]

    def total(tau):
        return float(np.clip(v - tau, lo, hi).sum())

    kinks = np.unique(np.concatenate([v - hi, v - lo, [0.0]]))
    kinks = kinks[kinks >= 0.0]
    # total() is non-increasing in tau; find the first kink at or below target
    a, b = 0, kinks.shape[0] - 1
    while a < b:
        m = (a + b) // 2
        if total(kinks[m]) > target:
            a = m + 1
        else:
            b = m
    t1 = kinks[a]
    t0 = kinks[a - 1] if a > 0 else 0.0
    s0, s1 = total(t0), total(t1)
    tau = t1 if s0 == s1 else t0 + (s0 - target) * (t1 - t0) / (s0 - s1)
    z = np.clip(v - tau, lo, hi)
    bump = 1e-15 * max(abs(tau), 1.0)
    while z.sum() > target and tau < t1:
        # rounding in the interpolation: nudge towards the feasible side
        tau = min(tau + bump, t1)
        bump *= 4.0
        z = np.clip(v - tau, lo, hi)
    return z


def _dual_candidate(A, g, p_full):
    """Lagrangian relaxation: bisection on the budget price, then greedy
    filling of the remaining budget across the price jump."""
    def mean_at(beta):
        x = _argmin_1d(A, g, beta)
        return x, x.mean()

    lo, hi = 0.0, 1.0
    x_hi, m = mean_at(hi)
    while m > p_full:
        lo, hi = hi, 2.0 * hi
        x_hi, m = mean_at(hi)
        if hi > 1e8:
            break
    x_lo, _ = mean_at(lo)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        x_mid, m = mean_at(mid)
        if m > p_full:
            lo, x_lo = mid, x_mid
        else:
            hi, x_hi = mid, x_mid
    x = x_hi.copy()
    n = x.shape[0]
    budget = n * p_full - x.sum()
    up = x_lo - x_hi
    gain = _phi(x_hi, A, g, 0.0, 0.0, 0.0) - _phi(x_lo, A, g, 0.0, 0.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(up > 0, gain / up, -np.inf)
    for i in np.argsort(-ratio, kind="stable"):
        if up[i] <= 0 or gain[i] <= 0 or up[i] > budget:
            continue
        x[i] = x_lo[i]
        budget -= up[i]
    return x, hi


def solve_opt5(A, g_scores, p_full: float, penalty: float = 1.0, *, max_iter: int = 500,
               tol: float = 1e-7, stall_iters: int = 25) -> GateAssignment:
    """Routing under the squared log-odds gate fit and the budget constraint.

    Minimizes ``mean((1-q_i) A_i + (logit q_i - g_i)^2)`` subject to
    ``mean(q) <= p_full``, with ``A_i`` the excess loss of ``f1`` over
    ``f0``. Each example's 1-D problem is non-convex and solved globally on
    a dense grid plus Newton polish; the coupling constraint is handled by
    scaled-form ADMM with penalty ``penalty``. A Lagrangian-relaxation
    candidate and the uniform assignment ``min(p_full, 1/2)`` act as
    safeguards; the best feasible point is returned.
    """
    A = np.asarray(A, dtype=float)
    g = _scores(g_scores)
    if not np.all(np.isfinite(A)) or A.shape != g.shape:
        raise ValueError("A must be finite and aligned with the gate scores")
    if not 0.0 <= p_full <= 1.0:
        raise ValueError("p_full must lie in [0, 1]")
    n = A.shape[0]
    feas_tol = 1e-4

    def obj(x):
        return float(np.mean(_phi(x, A, g, 0.0, 0.0, 0.0)))

    free = _argmin_1d(A, g)
    if free.mean() <= p_full:
        return GateAssignment(free, 0.0)
    if p_full <= Q_CLAMP:
        return GateAssignment(np.full(n, Q_CLAMP), 0.0)

    candidates = []
    uniform = np.full(n, np.clip(min(p_full, 0.5), Q_CLAMP, 1.0 - Q_CLAMP))
    candidates.append((obj(uniform), uniform, 0.0))
    x_dual, beta_dual = _dual_candidate(A, g, p_full)
    if x_dual.mean() <= p_full + feas_tol:
        candidates.append((obj(x_dual), x_dual, beta_dual / n))

    rho = float(penalty)
    z = x_dual.copy() if x_dual.mean() <= p_full else _project_budget(x_dual, p_full)
    u = np.zeros(n)
    converged = False
    best, since_best = min(c[0] for c in candidates), 0
    for _ in range(max_iter):
        x = _argmin_1d(A, g, 0.0, rho, z - u)
        z_old = z
        z = _project_budget(x + u, p_full)
        u = u + x - z
        val = obj(z)
        candidates.append((val, z, max(0.0, rho * float(u.mean()) / n)))
        if np.max(np.abs(x - z)) < tol and rho * np.max(np.abs(z - z_old)) < tol:
            converged = True
            break
        # the splitting may cycle on this non-convex problem; stop once the
        # best feasible objective has not improved for a while
        if val < best - 1e-12 * max(1.0, abs(best)):
            best, since_best = val, 0
        else:
            since_best += 1
            if since_best >= stall_iters:
                break
    if not converged:
        log.debug("opt5 ADMM stopped without converging after %d updates", _ + 1)
    feasible = [c for c in candidates if c[1].mean() <= p_full + feas_tol]
    if not feasible:
        raise ConvergenceError(f"no feasible routing after {max_iter} ADMM iterations")
    _, q, beta = min(feasible, key=lambda c: c[0])
    return GateAssignment(q, beta)


def solve_opt6(ds: Dataset, q, ridge: float = 1e-10) -> LinearModel:
    """Least-squares fit of ``g`` to the log-odds of ``q``."""
    q = np.clip(np.asarray(getattr(q, "q", q), dtype=float), Q_CLAMP, 1.0 - Q_CLAMP)
    t = logit(q)
    D = np.hstack([ds.features, np.ones((ds.n_examples, 1))])
    G = D.T @ D + ridge * np.eye(D.shape[1])
    theta = np.linalg.solve(G, D.T @ t)
    return LinearModel(theta[:-1], theta[-1])


def solve_opt7(ds: Dataset, q, l2: float = 1e-8) -> LinearModel:
    """Logistic regression of ``f1`` weighted by ``1 - q``."""
    w = 1.0 - np.asarray(getattr(q, "q", q), dtype=float)
    if not np.any(w > 0):
        raise ValueError("every example is routed to f0 (q == 1); the f1 fit is undefined")
    return train_logistic(ds, l2, sample_weights=w)


def _lstsq_joint_step(ds, q, gamma, pair, *, max_iter=5000, rtol=1e-8):
    """Gate/predictor step with a shared group penalty (used when ``gamma > 0``)."""
    X = ds.features
    y = ds.labels.astype(float)
    N, K = X.shape
    qc = np.clip(np.asarray(getattr(q, "q", q), dtype=float), Q_CLAMP, 1.0 - Q_CLAMP)
    t = logit(qc)
    p = 1.0 - qc
    weights = gamma * ds.costs

    def smooth(x):
        sg = X @ x[:K] + x[2 * K]
        sf = X @ x[K:2 * K] + x[2 * K + 1]
        res = sg - t
        val = float(np.sum(res**2) + np.sum(p * logistic_loss(y * sf))) / N
        dsg = 2.0 * res / N
        dsf = -p * y * sigmoid(-y * sf) / N
        return val, np.concatenate([X.T @ dsg, X.T @ dsf, [dsg.sum(), dsf.sum()]])

    def penalty(x):
        return float(np.sum(weights * np.hypot(x[:K], x[K:2 * K])))

    x, _, _ = _prox_gradient(smooth, penalty, lambda v, s: _group_shrink(v, K, s * weights),
                             _pack(pair.g, pair.f1), max_iter=max_iter, rtol=rtol)
    g, f1 = _unpack(x, K)
    return JointLinearPair(g, f1)


def adapt_lstsq(ds: Dataset, f0_scores, cfg: AdaptConfig, init: JointLinearPair | None = None):
    """Linear gate fitted to the log-odds of ``q``; returns ``(system, trace)``.

    With ``gamma == 0`` the gate and predictor steps are the plain least
    squares and weighted logistic fits; with ``gamma > 0`` they are solved
    jointly under the same group penalty as :func:`adapt_lin`.
    """
    s0 = _aligned_f0(ds, f0_scores)
    X, y = ds.features, ds.labels.astype(float)
    pair = init if init is not None else _linear_init(ds, cfg)
    l0 = logistic_loss(y * s0)
    values, prev, gate = [], None, None
    for it in range(cfg.outer_iters):
        try:
            A = logistic_loss(y * pair.f1.score(X)) - l0
            gate = solve_opt5(A, pair.g.score(X), cfg.p_full, cfg.opt5_penalty)
            values.append(full_objective(ds, gate, pair.g, pair.f1, s0, cfg.gamma, "lstsq"))
            if cfg.gamma > 0:
                pair = _lstsq_joint_step(ds, gate, cfg.gamma, pair)
            else:
                pair = JointLinearPair(solve_opt6(ds, gate), solve_opt7(ds, gate))
        except (ConvergenceError, ValueError) as exc:
            raise AdaptError(f"adapt_lstsq round {it}: {exc}", it) from exc
        cur = full_objective(ds, gate, pair.g, pair.f1, s0, cfg.gamma, "lstsq")
        values.append(cur)
        if _converged(prev, cur, cfg.tolerance):
            break
        prev = cur
    system = AdaptiveSystem(pair.g, pair.f1, info={"trainer": "adapt_lstsq", **cfg.as_dict()})
    return system, ObjectiveTrace(tuple(values), gate)


# --------------------------------------------------------------------------
# L1 baseline
# --------------------------------------------------------------------------

DEFAULT_C_GRID = tuple(np.logspace(-3, 1, 20))
DEFAULT_CLASS_WEIGHTS = tuple(np.round(np.linspace(0.05, 0.95, 19), 10))


def l1_supports(ds: Dataset, c_grid=DEFAULT_C_GRID) -> list:
    """Distinct supports obtained by thresholding L1 logistic weights at every level."""
    seen, out = set(), []
    for c in c_grid:
        w = train_l1_logistic(ds, float(c)).weights
        order = [int(a) for a in np.argsort(-np.abs(w), kind="stable") if w[a] != 0]
        for k in range(1, len(order) + 1):
            s = frozenset(order[:k])
            if s not in seen:
                seen.add(s)
                out.append(s)
    return out


def l1_system(ds: Dataset, support, class_weight: float, l2: float | None = None) -> AdaptiveSystem:
    """One baseline system: ``f1`` and a correctness gate restricted to ``support``.

    ``f1`` is an L2 logistic regression on ``support``; ``g`` is a
    class-weighted L2 logistic regression on the same features predicting
    whether ``f1`` is wrong (positive score routes to ``f0``). The "f1 wrong"
    class gets weight ``class_weight`` and the other class ``1 - class_weight``.
    """
    if not 0.0 <= class_weight <= 1.0:
        raise ValueError("class_weight must lie in [0, 1]")
    l2 = 1.0 / ds.n_examples if l2 is None else l2
    K = ds.n_features
    support = tuple(sorted(int(a) for a in support))
    f1 = train_logistic(ds, l2, features=support)
    wrong = np.where(f1.score(ds.features) >= 0, 1, -1) != ds.labels
    info = {"trainer": "l1_baseline", "support": support, "class_weight": float(class_weight)}
    w = float(class_weight)
    if wrong.all() or not wrong.any() or w in (0.0, 1.0):
        # one class is missing or carries no weight: the gate is a constant
        route_all = wrong.all() if (wrong.all() or not wrong.any()) else w == 1.0
        g = LinearModel(np.zeros(K), 1.0 if route_all else -1.0)
    else:
        pseudo = Dataset(ds.features, np.where(wrong, 1, -1), ds.costs)
        sw = np.where(wrong, w, 1.0 - w)
        g = train_logistic(pseudo, l2, sample_weights=sw, features=support)
    return AdaptiveSystem(g, f1, info=info)


def l1_baseline(ds: Dataset, c_grid=DEFAULT_C_GRID, class_weight_grid=DEFAULT_CLASS_WEIGHTS,
                l2: float | None = None) -> list:
    """Two-step baseline: sparse support first, gate second.

    Every support recovered by :func:`l1_supports` is paired with every class
    weight through :func:`l1_system`.
    """
    if len(c_grid) == 0 or len(class_weight_grid) == 0:
        raise ValueError("grids must be non-empty")
    return [l1_system(ds, support, float(w), l2)
            for support in l1_supports(ds, c_grid) for w in class_weight_grid]
