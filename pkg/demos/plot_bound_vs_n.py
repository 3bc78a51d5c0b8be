"""
How the error bound scales
==========================

For bounded entries the explicit bound decays like n^(-1/2), but the constants
86 and 243 are large. Next to the Monte Carlo estimate of the true distance
it stays far above 1 at every size a computer can sample.
"""

import numpy as np

import matchperm as mp

rng = np.random.default_rng(7)
cfg = mp.SamplerConfig(seed=0, replicates=100_000, workers=4)

print(f"{'n':>7} {'KS (MC)':>9} {'term1':>10} {'term2':>10} {'bound':>10}")
for n in (50, 100, 200, 400):
    a = np.triu(rng.integers(0, 10, size=(n, n)).astype(float), 1)
    D = mp.center_matrix(mp.ingest(a + a.T))
    ks, _ = mp.empirical_cdf_distance(D, cfg)
    b = mp.berry_esseen_bound(D)
    print(f"{n:7d} {ks:9.4f} {b.term1:10.3g} {b.term2:10.3g} {b.delta_bound:10.3g}")

# %%
# The bound itself only needs the matrix, so it is cheap at any size.
# Extrapolating c / sqrt(n) gives the n at which it would drop below 1.
for n in (10**3, 10**4):
    a = np.triu(rng.integers(0, 10, size=(n, n)).astype(float), 1)
    b = mp.berry_esseen_bound(mp.center_matrix(mp.ingest(a + a.T)))
    print(f"n={n}: bound {b.delta_bound:.3g}, informative from n ~ {(b.delta_bound**2 * n):.1e}")
