"""
MSE learning curves for a 5-tap system identification problem.

Theory (the weighted-variance recursion driven by the closed-form moment
matrices) against a 100-run Monte-Carlo simulation, for step sizes 0.1 and
0.01 under correlated complex Gaussian input. With matplotlib installed the
curves are also saved to learning_curves.png.
"""
import numpy as np

from nlmsmoments import FilterScenario, learning_curve, monte_carlo, steady_state, toeplitz_covariance

w_opt = [0.227, 0.460, 0.688, 0.460, 0.227]
cov = toeplitz_covariance(5, 0.5)
iterations, runs = 20_000, 100

curves = {}
for mu in (0.1, 0.01):
    sc = FilterScenario(w_opt, mu, noise_var=0.01, input_cov=cov)
    theory = learning_curve(sc, iterations, "mse")
    sim = monte_carlo(sc, iterations, runs, policy=2024)
    curves[mu] = (theory, sim)
    tail = sim.steady_state("mse")
    print(f"mu={mu}: steady-state MSE theory {10 * np.log10(steady_state(sc, 'mse')):.3f} dB, "
          f"simulation {10 * np.log10(tail.mean):.3f} dB (+/- {tail.std_error:.1e} linear)")
    gap = np.abs(theory.db() - sim.mse.db())
    print(f"         mean |gap| over the first 500 iterations {gap[:500].mean():.3f} dB")

# %% optional figure
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for mu, (theory, sim) in curves.items():
        ax.plot(sim.mse.db(), lw=0.5, alpha=0.6, label=f"simulation, mu={mu}")
        ax.plot(theory.db(), lw=1.5, label=f"theory, mu={mu}")
    ax.set_xscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("MSE (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig("learning_curves.png", dpi=120)
    print("saved learning_curves.png")
