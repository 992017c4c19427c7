"""Temporal pooling and benchmarking
=================================

Frame scores become one number per viewer through temporal pooling. The
hysteresis model remembers recent bad frames and reacts sharply to upcoming
ones. Predictions are then compared with mean opinion scores (MOS).
"""

# %%
import numpy as np

from omniqa import PoolingConfig, evaluate_predictions, f_test, pool_values

# %% [markdown]
# A brief quality drop in an otherwise clean sequence.

# %%
q = np.full(300, 40.0)
q[100:110] = 25.0
for strategy in ("arithmetic_mean", "hysteresis", "percentile", "gaussian_ascending"):
    print(f"{strategy:>19}: {pool_values(q, PoolingConfig(strategy=strategy)):.3f}")

# %% [markdown]
# The same drop near the end hurts more under recency-weighted pooling.

# %%
late = np.full(300, 40.0)
late[285:295] = 25.0
print("drop early vs late (gaussian_ascending):",
      round(pool_values(q, PoolingConfig(strategy="gaussian_ascending")), 3),
      round(pool_values(late, PoolingConfig(strategy="gaussian_ascending")), 3))

# %% [markdown]
# Benchmarking two synthetic models against MOS: a logistic curve maps the
# predictions to the MOS scale before PLCC, and the residuals feed an F-test.

# %%
rng = np.random.default_rng(1)
mos = rng.uniform(1, 5, 80)
good = 20 + 5 * mos + rng.normal(0, 0.8, 80)
poor = 20 + 5 * mos + rng.normal(0, 3.0, 80)
types = ["jpeg", "noise"] * 40

reports = {name: evaluate_predictions(p, mos, types, metric=name) for name, p in (("good", good), ("poor", poor))}
for rep in reports.values():
    print(rep.to_table())
res = f_test(reports["good"].residuals, reports["poor"].residuals)
print(f"F-test: {res.verdict} (F = {res.F:.3f}, p = {res.p_value:.2e})")
