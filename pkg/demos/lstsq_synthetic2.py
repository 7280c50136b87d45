"""The least-squares variant on the four-cluster problem.

Run: python demos/lstsq_synthetic2.py

Here the gate is regressed on the log-odds of q instead of being fitted by
KL. The routing step is non-convex per example; it is solved on a dense grid
and coordinated with the budget by a splitting loop.
"""

# %%
import numpy as np

from adaptapprox import AdaptConfig, adapt_lstsq, evaluate, gen_synthetic2
from adaptapprox.adapt import solve_opt5

ds = gen_synthetic2()
f0 = 5.0 * ds.labels

# %% the routing subproblem on its own
rng = np.random.default_rng(0)
A, g = rng.uniform(0, 4, 8), rng.standard_normal(8)
for p in (1.0, 0.5, 0.2):
    q = solve_opt5(A, g, p)
    print(f"p_full {p}: mean(q) {q.q.mean():.4f}  q = {np.round(q.q, 3)}")

# %% a full run
for gamma in (0.01, float(np.logspace(-4, 0, 20)[13]), 0.3):
    cfg = AdaptConfig(gamma=gamma, p_full=0.6, init="ones", outer_iters=30)
    system, trace = adapt_lstsq(ds, f0, cfg)
    ev = evaluate(system, ds, f0)
    print(f"gamma {gamma:.4f}: accuracy {ev.accuracy:.3f}, cost {ev.avg_cost:.4f}, "
          f"g {sorted(system.g.used_features)}, f1 {sorted(system.f1.used_features)}")
