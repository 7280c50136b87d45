"""Linear gating / prediction models and their solvers.

Three fits live here: (weighted) L2 logistic regression by damped Newton,
L1 logistic regression by accelerated proximal gradient, and the joint
group-sparse problem for a linear gate ``g`` and a linear cheap predictor
``f1`` under a fixed routing distribution ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import logistic_loss, sigmoid, softplus
from .dataset import Dataset


class ConvergenceError(RuntimeError):
    """A solver hit its iteration cap (or step floor) before converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class LineSearchError(ConvergenceError):
    pass


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Score ``weights @ x + intercept``; the feature set is the nonzero support."""

    weights: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    @classmethod
    def zeros(cls, n_features: int) -> "LinearModel":
        return cls(np.zeros(n_features), 0.0)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    @property
    def used_features(self) -> frozenset:
        return frozenset(int(a) for a in np.flatnonzero(self.weights))

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X @ self.weights + self.intercept

    def restricted(self, support) -> "LinearModel":
        w = np.zeros_like(self.weights)
        idx = np.asarray(sorted(support), dtype=np.int64)
        w[idx] = self.weights[idx]
        return LinearModel(w, self.intercept)


@dataclass(frozen=True, eq=False)
class JointLinearPair:
    g: LinearModel
    f1: LinearModel
    objective_trace: tuple = ()


# --------------------------------------------------------------------------
# L2 / weighted logistic regression
# --------------------------------------------------------------------------


def _design(X):
    return np.hstack([X, np.ones((X.shape[0], 1))])


def logistic_objective(theta, D, y, w, l2):
    """Mean weighted logistic loss plus ``l2/2 * |weights|^2`` and its gradient.

    ``theta`` stacks the weights and the (unregularized) intercept.
    """
    n = D.shape[0]
    m = y * (D @ theta)
    val = np.dot(w, logistic_loss(m)) / n + 0.5 * l2 * np.dot(theta[:-1], theta[:-1])
    r = -w * y * sigmoid(-m) / n
    grad = D.T @ r
    grad[:-1] += l2 * theta[:-1]
    return val, grad


def train_logistic(ds: Dataset, l2: float = 1.0, sample_weights=None, *, features=None,
                   max_iter: int = 200, tol: float = 1e-6) -> LinearModel:
    """Weighted L2-regularized logistic regression, solved by damped Newton.

    Minimizes ``(1/N) sum_i w_i log(1 + exp(-y_i (theta.x_i + b))) +
    l2 |theta|^2 / 2`` until the gradient norm is at most ``tol``.
    ``features`` restricts the fit to a subset of columns; the other weights
    are exactly zero.
    """
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    X = ds.features
    K = X.shape[1]
    cols = np.arange(K) if features is None else np.asarray(sorted(features), dtype=np.int64)
    D = _design(X[:, cols])
    y = ds.labels.astype(float)
    w = np.ones(ds.n_examples) if sample_weights is None else np.asarray(sample_weights, dtype=float)
    if w.shape != y.shape or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("sample_weights must be finite, non-negative and one per example")
    if not np.any(w > 0):
        raise ValueError("all sample weights are zero; the logistic fit is undefined")
    n = D.shape[0]
    reg = np.full(D.shape[1], l2)
    reg[-1] = 0.0
    theta = np.zeros(D.shape[1])
    val, grad = logistic_objective(theta, D, y, w, l2)
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad)
        if gnorm <= 1e-2 * tol:
            break
        s = sigmoid(D @ theta)
        h = w * s * (1.0 - s) / n
        H = (D.T * h) @ D + np.diag(reg)
        H[np.diag_indices_from(H)] += 1e-12 + 1e-10 * np.trace(H) / H.shape[0]
        try:
            step = -np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = -grad
        if np.dot(step, grad) >= 0:
            step = -grad
        t = 1.0
        while True:
            cand = theta + t * step
            cval, cgrad = logistic_objective(cand, D, y, w, l2)
            if cval <= val + 1e-4 * t * np.dot(grad, step) or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and cval > val:
            break
        theta, val, grad = cand, cval, cgrad
    gnorm = float(np.linalg.norm(grad))
    if gnorm > tol:
        raise ConvergenceError(f"logistic regression did not converge: gradient norm {gnorm:.3g}", gnorm)
    full = np.zeros(K)
    full[cols] = theta[:-1]
    return LinearModel(full, theta[-1])


# --------------------------------------------------------------------------
# proximal gradient machinery
# --------------------------------------------------------------------------


def _prox_gradient(smooth, penalty, prox, x0, *, max_iter, rtol, step0=1.0,
                   min_step=1e-18, accelerate=False, xtol=0.0):
    """Proximal gradient with halving backtracking.

    Without acceleration every accepted step starts its search at ``step0``
    and the composite objective is non-increasing. With acceleration the
    momentum is reset whenever the objective would increase.
    Returns ``(x, trace, converged)``.
    """
    x = x0.copy()
    fx, gx = smooth(x)
    F = fx + penalty(x)
    trace = [F]
    yk, fy, gy = x, fx, gx
    tk = 1.0
    step = step0
    for _ in range(max_iter):
        if not accelerate:
            step = step0
        while True:
            cand = prox(yk - step * gy, step)
            d = cand - yk
            fc, gc = smooth(cand)
            if fc <= fy + np.dot(gy, d) + np.dot(d, d) / (2.0 * step) + 1e-15 * abs(fy):
                break
            step *= 0.5
            if step < min_step:
                raise LineSearchError(f"line search step fell below {min_step:g}")
        Fc = fc + penalty(cand)
        if accelerate and Fc > F:
            if yk is x:
                return x, trace, True
            # restart momentum from the last iterate
            yk, fy, gy, tk = x, fx, gx, 1.0
            continue
        if not accelerate and Fc > F:
            return x, trace, True
        moved = np.max(np.abs(cand - x)) if x.size else 0.0
        change = abs(F - Fc)
        x_prev = x
        x, fx, gx, F = cand, fc, gc, Fc
        trace.append(F)
        if change <= rtol * max(abs(F), 1e-300) or (xtol > 0 and moved <= xtol):
            return x, trace, True
        if accelerate:
            tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
            yk = x + ((tk - 1.0) / tn) * (x - x_prev)
            tk = tn
            fy, gy = smooth(yk)
        else:
            yk, fy, gy = x, fx, gx
    return x, trace, False


# --------------------------------------------------------------------------
# L1 logistic regression
# --------------------------------------------------------------------------


def train_l1_logistic(ds: Dataset, c: float, *, max_iter: int = 20000, tol: float = 1e-12) -> LinearModel:
    """L1-regularized logistic regression.

    Minimizes ``sum_i log(1 + exp(-y_i (theta.x_i + b))) + |theta|_1 / c``
    (summed loss, inverse-regularization ``c`` as in liblinear) with an
    unpenalized intercept.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    D = _design(ds.features)
    y = ds.labels.astype(float)
    lam = 1.0 / c
    K = ds.n_features

    def smooth(theta):
        m = y * (D @ theta)
        return float(np.sum(logistic_loss(m))), D.T @ (-y * sigmoid(-m))

    def penalty(theta):
        return lam * float(np.sum(np.abs(theta[:K])))

    def prox(v, t):
        out = v.copy()
        out[:K] = np.sign(v[:K]) * np.maximum(np.abs(v[:K]) - t * lam, 0.0)
        return out

    theta, _, ok = _prox_gradient(smooth, penalty, prox, np.zeros(K + 1), max_iter=max_iter,
                                  rtol=tol, accelerate=True, xtol=1e-11)
    if not ok:
        raise ConvergenceError(f"L1 logistic regression hit the iteration cap ({max_iter})")
    return LinearModel(theta[:K], theta[K])


# --------------------------------------------------------------------------
# joint group-sparse problem for (g, f1)
# --------------------------------------------------------------------------


def group_prox(v, threshold):
    """Proximal map of ``threshold * |u|_2`` evaluated at the pair ``v``."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    v = np.asarray(v, dtype=float)
    nrm = float(np.hypot(v[0], v[1]))
    if nrm <= threshold:
        return np.zeros(2)
    return v * (1.0 - threshold / nrm)


def _pack(g: LinearModel, f1: LinearModel):
    return np.concatenate([g.weights, f1.weights, [g.intercept, f1.intercept]])


def _unpack(x, K):
    return LinearModel(x[:K], x[2 * K]), LinearModel(x[K:2 * K], x[2 * K + 1])


def _q_array(q):
    return np.asarray(getattr(q, "q", q), dtype=float)


def opt2_smooth(X, y, q, x):
    """Smooth part of the joint objective and its gradient.

    ``x`` stacks ``(g weights, f1 weights, g intercept, f1 intercept)``.
    The value is ``(1/N) sum_i (1-q_i)(l(y_i f1_i) + softplus(g_i)) +
    q_i softplus(-g_i)``.
    """
    N, K = X.shape
    sg = X @ x[:K] + x[2 * K]
    sf = X @ x[K:2 * K] + x[2 * K + 1]
    p = 1.0 - q
    val = float(np.sum(p * (logistic_loss(y * sf) + softplus(sg)) + q * softplus(-sg))) / N
    dsf = p * (-y) * sigmoid(-y * sf) / N
    dsg = (p * sigmoid(sg) - q * sigmoid(-sg)) / N
    grad = np.concatenate([X.T @ dsg, X.T @ dsf, [dsg.sum(), dsf.sum()]])
    return val, grad


def group_penalty(g: LinearModel, f1: LinearModel, costs, gamma) -> float:
    return float(gamma * np.sum(np.asarray(costs) * np.hypot(g.weights, f1.weights)))


def opt2_objective(ds: Dataset, q, gamma: float, g: LinearModel, f1: LinearModel) -> float:
    val, _ = opt2_smooth(ds.features, ds.labels.astype(float), _q_array(q), _pack(g, f1))
    return val + group_penalty(g, f1, ds.costs, gamma)


def _group_shrink(x, K, thresholds):
    out = x.copy()
    nrm = np.hypot(x[:K], x[K:2 * K])
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(nrm > thresholds, 1.0 - thresholds / nrm, 0.0)
    out[:K] = x[:K] * factor
    out[K:2 * K] = x[K:2 * K] * factor
    return out


def solve_opt2(ds: Dataset, q, gamma: float, init: JointLinearPair | None = None, *,
               max_iter: int = 5000, rtol: float = 1e-8, accelerate: bool = True) -> JointLinearPair:
    """Fit ``g`` and ``f1`` jointly for a fixed routing distribution ``q``.

    The penalty is ``gamma * sum_a c_a * sqrt(g_a^2 + f1_a^2)``; intercepts
    are free. Proximal gradient with backtracking from step 1, stopping when
    the relative objective change drops below ``rtol``.
    """
    if not gamma >= 0:
        raise ValueError("gamma must be non-negative")
    q = _q_array(q)
    if q.shape != (ds.n_examples,) or np.any(q < 0) or np.any(q > 1):
        raise ValueError("q must hold one probability per example")
    X = ds.features
    y = ds.labels.astype(float)
    K = ds.n_features
    weights = gamma * ds.costs
    if init is None:
        init = JointLinearPair(LinearModel.zeros(K), LinearModel.zeros(K))
    x0 = _pack(init.g, init.f1)

    def smooth(x):
        return opt2_smooth(X, y, q, x)

    def penalty(x):
        return float(np.sum(weights * np.hypot(x[:K], x[K:2 * K])))

    def prox(v, t):
        return _group_shrink(v, K, t * weights)

    x, trace, ok = _prox_gradient(smooth, penalty, prox, x0, max_iter=max_iter, rtol=rtol,
                                  accelerate=accelerate)
    g, f1 = _unpack(x, K)
    return JointLinearPair(g, f1, tuple(trace))


def opt2_critical_gamma(ds: Dataset, q) -> float:
    """Smallest ``gamma`` for which all-zero weights solve the joint problem."""
    q = _q_array(q)
    y = ds.labels.astype(float)
    p = 1.0 - q
    wp, wn = p[y > 0].sum(), p[y < 0].sum()
    with np.errstate(divide="ignore"):
        bf = np.log(wp) - np.log(wn)
    mq = q.mean()
    with np.errstate(divide="ignore"):
        bg = np.log(mq) - np.log1p(-mq)
    K = ds.n_features
    N = ds.n_examples
    dsf = p * (-y) * sigmoid(-y * bf) / N
    dsg = (p * sigmoid(bg) - q * sigmoid(-bg)) / N
    gg, gf = ds.features.T @ dsg, ds.features.T @ dsf
    nrm = np.hypot(gg, gf)
    c = ds.costs
    crit = 0.0
    for a in range(K):
        if nrm[a] == 0:
            continue
        crit = max(crit, np.inf if c[a] == 0 else nrm[a] / c[a])
    return float(crit)
