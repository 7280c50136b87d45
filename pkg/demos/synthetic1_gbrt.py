"""Boosted-tree gate and cheap model in front of a strong boosted model.

Run: python demos/synthetic1_gbrt.py   (a few seconds)

The gate is allowed to send at most 60% of the training mass to the
expensive model. Learning rate and number of rounds are picked on the
validation split; the test split is touched once at the end.
"""

# %%
import numpy as np

from adaptapprox import AdaptConfig, SplitSpec, adapt_gbrt, evaluate, gen_synthetic1, split, train_gbrt

ds = gen_synthetic1(17)
train, val, test = split(ds, SplitSpec((0.6, 0.2, 0.2), 0))
f0 = train_gbrt(train, 100, 3)
s_train, s_val, s_test = (f0.score(d.features) for d in (train, val, test))


def accuracy(scores, d):
    return np.mean(np.where(scores >= 0, 1, -1) == d.labels)


print(f"f0 accuracy: validation {accuracy(s_val, val):.3f}, test {accuracy(s_test, test):.3f}")

# %% validation sweep
results = []
for shrinkage in (0.1, 0.3, 1.0):
    for rounds in (10, 30):
        cfg = AdaptConfig(p_full=0.6, gamma=0.0, T=5, depth=2, outer_iters=rounds, shrinkage=shrinkage)
        system, trace = adapt_gbrt(train, s_train, cfg)
        ev = evaluate(system, val, s_val)
        results.append((ev, system, cfg))
        print(f"shrinkage {shrinkage:<4} rounds {rounds:2d}: val acc {ev.accuracy:.3f}, "
              f"to f0 {ev.f0_fraction:.2f}")

# small learning rates polarize the gate slowly, so hard routing keeps
# sending nearly everything to f0 after few rounds

# %% pick and test
ok = [r for r in results if r[0].f0_fraction <= 0.6]
ev_val, system, cfg = max(ok, key=lambda r: (r[0].accuracy, -r[0].f0_fraction))
ev = evaluate(system, test, s_test)
print(f"\nselected shrinkage {cfg.shrinkage}, rounds {cfg.outer_iters}")
print(f"test accuracy {ev.accuracy:.3f} (f0 alone {accuracy(s_test, test):.3f}); "
      f"{1 - ev.f0_fraction:.1%} of test examples never touch f0")
