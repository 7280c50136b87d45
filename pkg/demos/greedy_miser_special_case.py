"""With a zero budget for the expensive model, Adapt-Gbrt is cost-aware boosting.

Run: python demos/greedy_miser_special_case.py

When p_full = 0 every q_i is 0, the gate trees fit a constant target and
stay single leaves, and the cheap model's trees are exactly the rounds that
cost-aware boosting would have added on its own.
"""

# %%
import numpy as np

from adaptapprox import AdaptConfig, adapt_gbrt, evaluate, gen_synthetic1, greedy_miser
from adaptapprox.trees import logistic_training_loss

ds = gen_synthetic1(17, n_samples=400)
f0 = 5.0 * ds.labels
y = ds.labels.astype(float)

for gamma in (0.0, 0.01, 0.1):
    cfg = AdaptConfig(gamma=gamma, p_full=0.0, T=3, depth=3, outer_iters=4, tolerance=1e-15)
    system, trace = adapt_gbrt(ds, f0, cfg)
    rounds = len(trace) // 2
    ref = greedy_miser(ds, cfg.T * (1 + rounds), cfg.depth, cfg.shrinkage, gamma)
    gap = abs(logistic_training_loss(system.f1.score(ds.features), y)
              - logistic_training_loss(ref.score(ds.features), y))
    print(f"gamma {gamma:<5}: to f0 {evaluate(system, ds, f0).f0_fraction:.1f}, "
          f"gate trees with splits {sum(t.n_nodes > 1 for t in system.g.trees)}, "
          f"loss gap vs greedy_miser {gap:.1e}")
