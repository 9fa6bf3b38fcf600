"""
Step-size stability.

The mean recursion is stable below 2 / max_k(lambda_k E[s_k]); the
mean-square recursion below 1 / lambda_max(A^-1 B), which evaluates to 2
for any spectrum because each row of B sums to half the matching entry of A.
"""
import numpy as np

from nlmsmoments import FilterScenario, learning_curve, stability, toeplitz_covariance

# white input is represented by slightly separated eigenvalues, which the
# closed forms require
for alpha in (0.0, 0.5, 0.9):
    cov = toeplitz_covariance(5, alpha) if alpha else np.diag([1.0, 1.001, 1.002, 1.003, 1.004])
    sc = FilterScenario(np.ones(5), 0.5, 0.01, cov)
    rep = stability(sc)
    print(f"alpha={alpha}: mean bound {rep.mean_bound:.4f}, mean-square bound {rep.meansq_bound:.6f}")

# %% spectral radius of F across the step-size range
sc = FilterScenario(np.ones(5), 0.5, 0.01, toeplitz_covariance(5, 0.5))
for mu in (0.1, 0.5, 1.0, 1.5, 1.9, 2.0, 2.1, 3.0):
    rep = stability(sc.replace(mu=mu))
    print(f"mu={mu:<4} rho(F)={rep.rho_F:.6f} {'stable' if rep.stable else 'UNSTABLE'}")

# %% beyond the bound the predicted curve diverges
curve = learning_curve(sc.replace(mu=3.0), 200).values
print(f"mu=3.0: EMSE after 200 iterations is {curve[-1] / curve[0]:.3g} times its initial value")
