"""
Ratio-variable moments: closed form against brute-force sampling.

Every entry of the NLMS moment matrices reduces to moments of ratios such as
s_k = |u_k|^2 / sum_i l_i |u_i|^2 for a whitened Gaussian regressor. Here the
closed forms are printed next to sample estimates for the eigenvalues of the
5-tap Toeplitz covariance R(i, j) = 0.5^|i-j|.
"""
import numpy as np

from nlmsmoments import derived_moments, estimate_moment_set, toeplitz_covariance, whiten

spectrum = whiten(toeplitz_covariance(5, 0.5)).spectrum()
print("eigenvalues:", np.round(spectrum.values, 5))

# %% closed forms (memoized on the spectrum)
ms = derived_moments(spectrum)

# %% sample estimates with batch-mean standard errors
est = estimate_moment_set(spectrum, 1_000_000, seed=1)

print(f"\n{'k':>3} {'E[s_k]':>12} {'oracle':>12} {'z':>6}   {'E[z_k^2]':>12} {'oracle':>12} {'z':>6}")
for k in range(spectrum.M):
    z1 = (ms.mean_sk[k] - est.mean_sk.value[k]) / est.mean_sk.std_error[k]
    z2 = (ms.second_zk[k] - est.second_zk.value[k]) / est.second_zk.std_error[k]
    print(f"{k:>3} {ms.mean_sk[k]:12.6f} {est.mean_sk.value[k]:12.6f} {z1:6.2f}"
          f"   {ms.second_zk[k]:12.6f} {est.second_zk.value[k]:12.6f} {z2:6.2f}")

print(f"\nE[r^2]: closed form {ms.second_r:.6f}, oracle {est.second_r.value:.6f} "
      f"+/- {est.second_r.std_error:.1e}")

# %% the whitened fourth-order matrix, and the identity it must satisfy:
# sum_l l_l E[|u_k|^2 |u_l|^2 / Y^2] = E[s_k]
lam = spectrum.values
print("\nB_bar row sums weighted by lambda vs E[s_k]:")
print(np.round(ms.cross_fourth @ lam, 8))
print(np.round(ms.mean_sk, 8))
