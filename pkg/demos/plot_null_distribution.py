"""
The null distribution of U
==========================

Under the null every perfect matching is equally likely. For small n we can
list them all and compare the resulting law of the standardized statistic W
with the standard normal.

"""

import numpy as np

import matchperm as mp
from matchperm.engine import null_values

rng = np.random.default_rng(0)

for n in (6, 8, 10, 12, 14):
    a = np.triu(rng.integers(0, 10, size=(n, n)).astype(float), 1)
    E = mp.ingest(a + a.T)
    D = mp.center_matrix(E)
    m = mp.exact_moments(E)
    u = null_values(D)
    # enumeration agrees with the closed-form variance
    assert np.isclose(u.var(), m.variance)
    ks, bound = mp.empirical_cdf_distance(D)
    print(f"n={n:2d}  matchings={u.size:6d}  KS={ks:.4f}  bound={bound:9.3g}")

# %%
# A crude text histogram of W at n = 14.
w = u / np.sqrt(m.variance)
counts, edges = np.histogram(w, bins=np.linspace(-3, 3, 13))
for c, lo in zip(counts, edges):
    print(f"{lo:+.1f} {'#' * int(60 * c / counts.max())}")
