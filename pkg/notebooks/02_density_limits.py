"""
Density above the critical value
================================

``count_in(a, b) / n`` settles at ``p P(a < X < b)`` for intervals above the
critical value, for any fitness law.  We check a uniform and an exponential
case, the deterministic births/t_n bracket, and the slow growth of t_n.
"""

# %%
import numpy as np

from evoflow import (ExponentialLaw, ModelParams, Trackers, UniformLaw, density_bracket, density_target,
                     new_chain, run, tail_bound_check)

params = ModelParams(2 / 3)

# %%
for law, (a, b) in [(UniformLaw(), (0.6, 0.8)), (ExponentialLaw(1.0), (1.0, 2.0))]:
    est = []
    for seed in range(5):
        tr = Trackers(intervals=[(a, b)])
        st = run(new_chain(params, law, seed), 10**6, tr)
        br = density_bracket(st, tr, a, b)
        assert br.holds
        est.append(st.population.count_in(a, b) / st.n)
    print(f"{law.label:>16} ({a}, {b}): mean {np.mean(est):.5f}  target {density_target(params, law, a, b):.5f}")

# %%
# t_n grows like sqrt(n), far below the tail-bound threshold
for n in (10**4, 10**5, 10**6):
    tr = Trackers()
    run(new_chain(params, seed=3), n, tr)
    chk = tail_bound_check(tr, params)
    print(f"n={n:>8}  t_n={tr.t_n:6d}  t_n/sqrt(n)={tr.t_n / n**0.5:6.2f}  margin={chk.margin:.3f}")

# %%
# larger p, lower critical value
for p in (0.55, 0.65, 0.75, 0.85, 0.95):
    pr = ModelParams(p)
    st = run(new_chain(pr, seed=0), 200_000)
    target = f"{0.2 * p:.4f}" if pr.f_c <= 0.6 else "n/a (interval below f_c)"
    print(f"p={p:.2f}  f_c={pr.f_c:.4f}  density(0.6,0.8)={st.population.count_in(0.6, 0.8) / st.n:.4f}"
          f"  target={target}")
