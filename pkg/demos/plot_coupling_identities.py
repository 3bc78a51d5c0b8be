"""
Exchangeable pairs by re-pairing
================================

Pick two subjects I and J at random and re-pair them: I goes with J and
their former partners go with each other. The new matching has the same law
as the old one, and on average U shrinks by the factor 4/n.

"""

import numpy as np

import matchperm as mp
from matchperm.diagnostics import coupling_increments

rng = np.random.default_rng(1)
n = 10
E = mp.ingest(rng.uniform(size=(n, n)))
D = mp.center_matrix(E)

pi = mp.sample_matching(n, mp.make_rng(5))
star = mp.coupling_step(pi, 0, 3)
print("pi  :", pi.to_list(one_based=True))
print("pi* :", star.to_list(one_based=True))

# %%
# Average increment over all ordered (I, J) against -(4/n) U.
inc = coupling_increments(D, pi)
mean_inc = inc.sum() / (n * (n - 1))
print("mean increment", mean_inc)
print("-(4/n) U      ", -4 / n * mp.statistic(D, pi))

# %%
# Every single increment is bounded by four times the spread of the entries.
print("max |increment| =", np.abs(inc).max(), " 4 alpha =", 4 * D.alpha)

# %%
# The diagnose helper runs both checks on many random matchings.
print(mp.diagnose(D, mp.SamplerConfig(seed=0, replicates=20_000)).to_json())
