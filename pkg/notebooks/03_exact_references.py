"""
Exact references for the below-critical count
=============================================

``|L_n|``, the number of species below the critical value, is a lazy reflected
walk.  Its law at a fixed horizon is computed exactly two ways and compared
with simulation; the simple-walk survival table gives the return-time
benchmark.
"""

# %%
import math

import numpy as np

from evoflow import (ModelParams, Trackers, endpoint_l_sizes, enumerate_l_paths, exact_l_pmf, excursion_summary,
                     merge, new_chain, run, srw_survival_table)
from evoflow.trackers import excursion_survival

params = ModelParams(2 / 3)

# %%
print("n  max|sweep - enumeration|")
for n in range(0, 13, 3):
    print(n, np.abs(exact_l_pmf(params, n).probs - enumerate_l_paths(params, n).probs).max())

# %%
sizes = endpoint_l_sizes(params, 10, 200_000, seed=1)
emp = np.bincount(sizes, minlength=11) / sizes.size
exact = exact_l_pmf(params, 10)
print("k  exact    simulated")
for k in range(6):
    print(k, f"{exact[k]:.5f}  {emp[k]:.5f}")
print("total variation", round(exact.total_variation(emp), 5))

# %%
# excursion lengths: G is geometric with mean 3, E outlasts the simple walk
tr = None
for seed in range(10):
    t = Trackers()
    run(new_chain(params, seed=seed), 10**6, t)
    tr = t if tr is None else merge(tr, t)
summ = excursion_summary(tr)
print("excursions", summ.count, "mean G", round(summ.mean_G, 4))
srw = srw_survival_table(30)
surv, se = excursion_survival(tr, [1, 3, 10, 30])
for n, s in zip([1, 3, 10, 30], surv):
    print(f"P(E>{n:2d}) = {s:.4f}   simple walk {srw[n]:.4f}")

# %%
n = 10**4
print("srw survival * sqrt(pi n / 2) at n=1e4:", srw_survival_table(n)[-1] * math.sqrt(math.pi * n / 2))
