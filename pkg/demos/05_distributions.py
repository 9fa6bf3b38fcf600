"""
Distributions of the ratio variables.

Closed-form CDFs of s_k, s_kkbar and r = 1/||u||^2_Lambda compared with
empirical CDFs; the reported band is the 99% Dvoretzky-Kiefer-Wolfowitz
half-width, so the sup-distance should fall inside it.
"""
import numpy as np

from nlmsmoments import empirical_cdf, toeplitz_covariance, whiten
from nlmsmoments import eigmoments as em

s = whiten(toeplitz_covariance(5, 0.5)).spectrum()

grid = np.linspace(0, 1 / s[4], 200)
ec = empirical_cdf("s_k", s, 500_000, grid, seed=1, index=4)
ref = [em.cdf_sk(s, 4, x) for x in grid]
print(f"s_4:     sup-distance {ec.sup_distance(ref):.5f}  (band {ec.band:.5f})")

grid = np.linspace(0, 1 / np.sqrt(s[0] * s[2]), 200)
ec = empirical_cdf("s_kkbar", s, 500_000, grid, seed=2, index=(0, 2))
ref = [em.cdf_skkbar(s, (0, 2), x) for x in grid]
print(f"s_(0,2): sup-distance {ec.sup_distance(ref):.5f}  (band {ec.band:.5f})")

grid = np.linspace(0, 5, 200)
ec = empirical_cdf("r", s, 500_000, grid, seed=3)
ref = [em.cdf_r(s, x) for x in grid]
print(f"r:       sup-distance {ec.sup_distance(ref):.5f}  (band {ec.band:.5f})")

# %% median of r from the closed-form CDF by bisection
lo, hi = 0.0, 5.0
for _ in range(60):
    mid = 0.5 * (lo + hi)
    lo, hi = (mid, hi) if em.cdf_r(s, mid) < 0.5 else (lo, mid)
print(f"median of r: {lo:.6f}; mean {em.mean_r(s):.6f}")
