"""
Fitness histogram after 100,000 events
======================================

Births (probability 2/3) add a species with a uniform fitness; deaths remove
the least fit.  Species below 1/2 keep getting killed, the rest pile up with a
flat profile.  Writes ``fitness_histogram.svg`` next to this script.
"""

# %%
from pathlib import Path

import numpy as np

from evoflow import ModelParams, new_chain, run, snapshot_histogram
from evoflow.svg import histogram_svg

params = ModelParams(2 / 3)
state = run(new_chain(params, seed=1), 100_000)
print(state)

# %%
hist = snapshot_histogram(state, 20, 0.0, 1.0)
for lo, c in zip(hist.edges[:-1], hist.counts):
    print(f"[{lo:.2f}, {lo + 0.05:.2f})  {c:5d}  " + "#" * (c // 100))

# %%
# bars above f_c should be near-equal, bars below near-empty
above = hist.counts[10:]
print("above f_c: min", above.min(), "max", above.max(), "cv", round(above.std() / above.mean(), 3))
print("below f_c:", hist.counts[:10].sum(), "of", state.size())

# %%
out = Path(__file__).with_name("fitness_histogram.svg")
out.write_text(histogram_svg(hist.edges, hist.counts, "p=2/3, n=100000", params.f_c, "f_c"))
print("wrote", out)
