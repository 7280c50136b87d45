"""Brute-force and independent reference solvers used only by the tests.

None of these share code with the package beyond plain numpy/scipy; they
are deliberately slow and simple.
"""

import numpy as np
from scipy.optimize import minimize


def _log1pexp(t):
    return np.logaddexp(0.0, t)


# --------------------------------------------------------------------------
# CART by exhaustive enumeration
# --------------------------------------------------------------------------


def _sse(r):
    return float(np.sum((r - r.mean()) ** 2)) if r.size else 0.0


def exhaustive_cart(X, r, depth, gamma=0.0, costs=None, unused=None):
    """Recursive CART that scores every (feature, midpoint) by direct SSE sums.

    Returns nested tuples: ("leaf", value) or ("split", a, thr, left, right).
    Same conventions as the package: gain = SSE drop / 2 minus the charge
    of an unacquired feature; ties -> lower feature, then lower threshold;
    depth-first, left subtree first; gains below 1e-12 * sum(r^2) rejected.
    """
    X = np.asarray(X, dtype=float)
    r = np.asarray(r, dtype=float)
    K = X.shape[1]
    costs = np.zeros(K) if costs is None else np.asarray(costs, dtype=float)
    state = {"unused": np.ones(K, bool) if unused is None else np.array(unused, bool)}

    def grow(rows, level):
        rr = r[rows]
        leaf = ("leaf", float(rr.mean()))
        if level >= depth or rows.size < 2:
            return leaf
        parent = _sse(rr)
        floor = 1e-12 * (float(rr @ rr) + 1e-300)
        best = None
        for a in range(K):
            vals = np.unique(X[rows, a])
            for lo, hi in zip(vals[:-1], vals[1:]):
                thr = 0.5 * (lo + hi)
                if not lo <= thr < hi:
                    thr = lo
                mask = X[rows, a] <= thr
                drop = parent - _sse(rr[mask]) - _sse(rr[~mask])
                gain = 0.5 * drop - (gamma * costs[a] if state["unused"][a] else 0.0)
                if gain > floor and (best is None or gain > best[0] + 1e-12 * abs(best[0])):
                    best = (gain, a, thr)
        if best is None:
            return leaf
        _, a, thr = best
        state["unused"][a] = False
        mask = X[rows, a] <= thr
        left = grow(rows[mask], level + 1)
        right = grow(rows[~mask], level + 1)
        return ("split", a, thr, left, right)

    return grow(np.arange(X.shape[0]), 0)


def tree_to_nested(tree, k=0):
    """Convert a package RegressionTree to the oracle's nested-tuple form."""
    if tree.feature[k] < 0:
        return ("leaf", float(tree.value[k]))
    return ("split", int(tree.feature[k]), float(tree.threshold[k]),
            tree_to_nested(tree, int(tree.left[k])), tree_to_nested(tree, int(tree.right[k])))


def nested_equal(a, b, tol=1e-12):
    if a[0] != b[0]:
        return False
    if a[0] == "leaf":
        return abs(a[1] - b[1]) <= tol * max(1.0, abs(a[1]))
    return (a[1] == b[1] and abs(a[2] - b[2]) <= tol * max(1.0, abs(a[2]))
            and nested_equal(a[3], b[3], tol) and nested_equal(a[4], b[4], tol))


# --------------------------------------------------------------------------
# budgeted routing objective on a grid
# --------------------------------------------------------------------------


def _entropy(q):
    out = np.zeros_like(q)
    inner = (q > 0) & (q < 1)
    qi = q[inner]
    out[inner] = -(qi * np.log(qi) + (1 - qi) * np.log(1 - qi))
    return out


def opt1_grid_min(A, B, p_full, resolution=1e-3):
    """Exact minimum of mean((1-q)A + qB - H(q)) over the lattice
    q in {0, res, ..., 1}^N with mean(q) <= p_full, by min-plus dynamic
    programming over examples (state = sum of lattice indices)."""
    A, B = np.asarray(A, float), np.asarray(B, float)
    N = A.shape[0]
    steps = int(round(1.0 / resolution))
    grid = np.arange(steps + 1) / steps
    cap = int(np.floor(N * p_full * steps + 1e-9))
    best = np.zeros(1)  # best[s] over sums s of the examples processed so far
    for i in range(N):
        cost = (1 - grid) * A[i] + grid * B[i] - _entropy(grid)
        new = np.full(min(best.size + steps, cap + 1), np.inf)
        for j in range(min(steps, cap) + 1):
            hi = min(best.size, new.size - j)
            if hi <= 0:
                break
            np.minimum(new[j:j + hi], best[:hi] + cost[j], out=new[j:j + hi])
        best = new
    return float(best.min()) / N


def opt5_grid_1d(A, g, resolution=1e-6):
    """Dense-grid minimizer of (1-q)A + (logit q - g)^2 on [1e-6, 1-1e-6]."""
    xs = np.arange(1e-6, 1.0 - 1e-6 + resolution / 2, resolution)
    vals = (1 - xs) * A + (np.log(xs) - np.log1p(-xs) - g) ** 2
    i = int(np.argmin(vals))
    return float(xs[i]), float(vals[i])


def opt5_grid_2d(A, g, p_full, resolution=1e-3):
    """Grid minimum of the two-example routing objective under mean(q) <= p_full."""
    xs = np.concatenate([[1e-6], np.arange(resolution, 1.0, resolution), [1 - 1e-6]])
    lg = np.log(xs) - np.log1p(-xs)
    c0 = (1 - xs) * A[0] + (lg - g[0]) ** 2
    c1 = (1 - xs) * A[1] + (lg - g[1]) ** 2
    tot = 0.5 * (c0[:, None] + c1[None, :])
    feas = (xs[:, None] + xs[None, :]) <= 2 * p_full + 1e-12
    return float(np.min(np.where(feas, tot, np.inf)))


# --------------------------------------------------------------------------
# joint (g, f1) problem by block coordinate descent
# --------------------------------------------------------------------------


def opt2_value(X, y, q, gamma, costs, g_w, g_b, f_w, f_b):
    N = X.shape[0]
    sg = X @ g_w + g_b
    sf = X @ f_w + f_b
    p = 1 - q
    smooth = np.sum(p * (_log1pexp(-y * sf) + _log1pexp(sg)) + q * _log1pexp(-sg)) / N
    return smooth + gamma * np.sum(costs * np.sqrt(g_w ** 2 + f_w ** 2))


def opt2_block_cd(X, y, q, gamma, costs, sweeps=500, tol=1e-13):
    """Minimize the joint objective one block at a time.

    Blocks: the two intercepts, then each feature's (g_a, f1_a) pair. A pair
    is set to zero when the smooth gradient at zero is inside the penalty
    ball; otherwise it is optimized by BFGS (the minimizer is away from the
    kink there).
    """
    N, K = X.shape
    g_w, f_w = np.zeros(K), np.zeros(K)
    g_b = f_b = 0.0
    h = 1e-7
    prev = np.inf
    for _ in range(sweeps):
        res = minimize(lambda b: opt2_value(X, y, q, gamma, costs, g_w, b[0], f_w, b[1]),
                       np.array([g_b, f_b]), method="BFGS", options={"gtol": 1e-12})
        g_b, f_b = res.x
        for a in range(K):
            def val(u, a=a):
                gw, fw = g_w.copy(), f_w.copy()
                gw[a], fw[a] = u
                return opt2_value(X, y, q, 0.0, costs, gw, g_b, fw, f_b)
            grad0 = np.array([(val([h, 0]) - val([-h, 0])) / (2 * h),
                              (val([0, h]) - val([0, -h])) / (2 * h)])
            if np.hypot(*grad0) <= gamma * costs[a]:
                g_w[a] = f_w[a] = 0.0
                continue
            start = np.array([g_w[a], f_w[a]])
            if not np.any(start):
                start = -1e-3 * grad0
            res = minimize(lambda u: val(u) + gamma * costs[a] * np.hypot(u[0], u[1]), start,
                           method="BFGS", options={"gtol": 1e-12})
            g_w[a], f_w[a] = res.x
        cur = opt2_value(X, y, q, gamma, costs, g_w, g_b, f_w, f_b)
        if prev - cur < tol:
            break
        prev = cur
    return cur, (g_w, g_b, f_w, f_b)


# --------------------------------------------------------------------------
# L1 logistic regression by bound-constrained splitting
# --------------------------------------------------------------------------


def l1_logistic_lbfgsb(X, y, c):
    """Minimize sum log(1+exp(-y(w.x+b))) + |w|_1 / c with w = w_plus - w_minus >= 0 parts."""
    N, K = X.shape
    lam = 1.0 / c

    def fun(z):
        wp, wm, b = z[:K], z[K:2 * K], z[-1]
        m = y * (X @ (wp - wm) + b)
        loss = np.sum(_log1pexp(-m))
        s = -y / (1 + np.exp(np.clip(m, -700, 700)))
        gw = X.T @ s
        grad = np.concatenate([gw + lam, -gw + lam, [s.sum()]])
        return loss + lam * np.sum(wp + wm), grad

    bounds = [(0, None)] * (2 * K) + [(None, None)]
    res = minimize(fun, np.zeros(2 * K + 1), jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"ftol": 1e-15, "gtol": 1e-11, "maxiter": 20000})
    return float(res.fun), res.x[:K] - res.x[K:2 * K], float(res.x[-1])


def central_gradient(f, x, h=1e-6):
    x = np.asarray(x, float)
    out = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (f(x + e) - f(x - e)) / (2 * h)
    return out
