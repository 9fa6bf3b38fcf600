"""
Monte-Carlo NLMS
================

Ground-truth simulation of the NLMS recursion

    e_i = d_i - u_i w_{i-1},      w_i = w_{i-1} + mu u_i^* e_i / ||u_i||^2

against ``d_i = u_i w^o_i + v_i`` with an optional random-walk plant
``w^o_i = w^o_{i-1} + q_i``. Regressors are circular complex Gaussian with a
prescribed covariance.

Every run owns a random stream derived from ``(master_seed, run_index)``;
runs are simulated side by side on a batch axis, and averaging uses exactly
rounded sums, so results do not depend on how runs are grouped or scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SimulationError, ValidationError
from .momentmat import InputCovariance
from .predictor import FilterScenario, LearningCurve

__all__ = [
    "RunResult",
    "RngSeedPolicy",
    "MonteCarloResult",
    "TailEstimate",
    "hermitian_sqrt",
    "gen_regressor",
    "nlms_run",
    "monte_carlo",
    "tail_average",
    "achieved_snr_db",
]

# regressors/noise are drawn in blocks of this many iterations per run
BLOCK = 1024
TAIL_FRACTION = 0.2


@dataclass
class RunResult:
    """
    Per-iteration error statistics of one or more runs.

    ``apriori_sq[i] = |u_i w~_{i-1}|^2``, ``msd[i] = ||w~_{i-1}||^2`` and
    ``mse[i] = |e_i|^2``, where ``w~_{i-1} = w^o_{i-1} - w_{i-1}`` is the
    weight error seen by regressor ``u_i``. Arrays have shape
    ``(iterations,)`` for a single run or ``(runs, iterations)``.
    """

    apriori_sq: np.ndarray
    msd: np.ndarray
    mse: np.ndarray


@dataclass(frozen=True)
class RngSeedPolicy:
    """Derives an independent, reproducible random stream for each run."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValidationError("master_seed must be a 64-bit unsigned integer")

    def seed_sequence(self, run_index):
        return np.random.SeedSequence(int(self.master_seed), spawn_key=(int(run_index),))

    def generator(self, run_index):
        return np.random.Generator(np.random.PCG64(self.seed_sequence(run_index)))


def hermitian_sqrt(R):
    """Hermitian positive square root of a covariance matrix."""
    vals, vecs = np.linalg.eigh(np.asarray(R))
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    return root


def _cn(rng, shape):
    # circular complex normal, unit total variance
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def gen_regressor(cov, rng, size=None, sqrt_cov=None):
    """
    Draw regressor rows ``u ~ CN(0, R)``, i.e. ``E[u_i conj(u_j)] = R[i, j]``.

    Parameters
    ----------
    cov: InputCovariance or array_like
    rng: numpy.random.Generator
    size: int, optional
        Number of rows; a single row vector is returned when omitted.
    sqrt_cov: ndarray, optional
        Precomputed :func:`hermitian_sqrt` of the covariance.
    """
    if not isinstance(cov, InputCovariance):
        cov = InputCovariance(cov)
    S = hermitian_sqrt(cov.matrix) if sqrt_cov is None else sqrt_cov
    n = 1 if size is None else int(size)
    g = _cn(rng, (n, cov.M))
    u = g @ S.T
    return u[0] if size is None else u


class _Stream:
    """Block-wise draws for one run, in a fixed order."""

    def __init__(self, rng, S, noise_std, Sq):
        self.rng, self.S, self.noise_std, self.Sq = rng, S, noise_std, Sq

    def block(self, n):
        M = self.S.shape[0]
        u = _cn(self.rng, (n, M)) @ self.S.T
        v = _cn(self.rng, (n,)) * self.noise_std
        q = None if self.Sq is None else _cn(self.rng, (n, M)) @ self.Sq.T
        return u, v, q


def _simulate(sc: FilterScenario, iterations, rngs):
    """Run len(rngs) independent NLMS runs side by side."""
    R = len(rngs)
    N = int(iterations)
    M = sc.M
    S = hermitian_sqrt(sc.input_cov.matrix)
    Sq = None if sc.stationary else hermitian_sqrt(sc.walk_cov)
    streams = [_Stream(rng, S, math.sqrt(sc.noise_var), Sq) for rng in rngs]
    apriori = np.empty((R, N))
    msd = np.empty((R, N))
    mse = np.empty((R, N))
    w = np.zeros((R, M), dtype=complex)
    wo = np.tile(sc.w_opt, (R, 1))
    mu = sc.mu
    with np.errstate(over="ignore", invalid="ignore"):
        _recurse(streams, N, w, wo, mu, Sq is not None, apriori, msd, mse)
    return RunResult(apriori, msd, mse)


def _recurse(streams, N, w, wo, mu, walk, apriori, msd, mse):
    for start in range(0, N, BLOCK):
        n = min(BLOCK, N - start)
        draws = [st.block(n) for st in streams]
        U = np.stack([d[0] for d in draws])
        V = np.stack([d[1] for d in draws])
        Q = np.stack([d[2] for d in draws]) if walk else None
        norms = (U.real**2 + U.imag**2).sum(axis=2)
        if np.any(norms == 0):
            raise SimulationError("zero-norm regressor; NLMS update undefined without regularization")
        for j in range(n):
            i = start + j
            u = U[:, j, :]
            wt = wo - w
            a = (u * wt).sum(axis=1)
            apriori[:, i] = a.real**2 + a.imag**2
            msd[:, i] = (wt.real**2 + wt.imag**2).sum(axis=1)
            if Q is not None:
                wo = wo + Q[:, j, :]
                a = (u * (wo - w)).sum(axis=1)
            e = a + V[:, j]
            mse[:, i] = e.real**2 + e.imag**2
            w = w + (mu * e / norms[:, j])[:, None] * u.conj()


def nlms_run(sc: FilterScenario, iterations, rng) -> RunResult:
    """Simulate one NLMS run of ``iterations`` steps from ``w_{-1} = 0``."""
    if int(iterations) < 1:
        raise ValidationError("iterations must be at least 1")
    res = _simulate(sc, iterations, [rng])
    return RunResult(res.apriori_sq[0], res.msd[0], res.mse[0])


@dataclass(frozen=True)
class TailEstimate:
    """Steady-state estimate from the final stretch of each run."""

    mean: float
    std_error: float
    slope_z: float
    window: tuple

    @property
    def converged(self):
        # no statistically detectable drift between the two halves of the window
        return abs(self.slope_z) < 3.0


@dataclass
class MonteCarloResult:
    """Run-averaged learning curves with standard-error bands."""

    emse: LearningCurve
    msd: LearningCurve
    mse: LearningCurve
    runs: int
    iterations: int
    tails: dict = field(default_factory=dict)
    per_run: RunResult | None = None

    def curve(self, kind):
        return {"emse": self.emse, "msd": self.msd, "mse": self.mse}[kind]

    def steady_state(self, kind="emse") -> TailEstimate:
        return self.tails[kind]


def _column_fsum_mean(x):
    # exactly rounded per-iteration means: independent of run order
    return np.array([math.fsum(col) for col in x.T]) / x.shape[0]


def tail_average(per_run, fraction=TAIL_FRACTION) -> TailEstimate:
    """
    Tail average over the final ``fraction`` of iterations.

    ``per_run`` has shape ``(runs, iterations)``. The standard error uses the
    spread of per-run tail means; ``slope_z`` compares the two halves of the
    window, also across runs.
    """
    per_run = np.atleast_2d(per_run)
    R, N = per_run.shape
    start = min(N - 1, int(math.floor(N * (1.0 - fraction))))
    window = per_run[:, start:]
    run_means = np.array([math.fsum(row) / row.size for row in window])
    mean = math.fsum(run_means) / R
    se = float(np.std(run_means, ddof=1) / math.sqrt(R)) if R > 1 else math.nan
    half = window.shape[1] // 2
    if half >= 1 and R > 1:
        diffs = window[:, half:].mean(axis=1) - window[:, :half].mean(axis=1)
        dse = np.std(diffs, ddof=1) / math.sqrt(R)
        slope_z = float(diffs.mean() / dse) if dse > 0 else 0.0
    else:
        slope_z = math.nan
    return TailEstimate(mean, se, slope_z, (start, N))


def monte_carlo(sc: FilterScenario, iterations, runs, policy, workers=1, keep_runs=False):
    """
    Average ``runs`` independent NLMS runs.

    Parameters
    ----------
    sc: FilterScenario
    iterations, runs: int
    policy: RngSeedPolicy or int
        Seed policy (an int is taken as the master seed).
    workers: int, optional
        Number of threads; results are bit-identical for any value.
    keep_runs: bool, optional
        Keep the per-run curves in the result.

    Returns
    -------
    MonteCarloResult
    """
    if not isinstance(policy, RngSeedPolicy):
        policy = RngSeedPolicy(int(policy))
    runs = int(runs)
    iterations = int(iterations)
    if runs < 1:
        raise ValidationError("runs must be at least 1")
    if iterations < 0:
        raise ValidationError("iterations must be nonnegative")
    if iterations == 0:
        empty = np.empty((runs, 0))
        per_run = RunResult(empty, empty, empty)
    else:
        groups = np.array_split(np.arange(runs), max(1, min(int(workers), runs)))
        groups = [g for g in groups if g.size]

        def job(idx):
            return _simulate(sc, iterations, [policy.generator(r) for r in idx])

        if len(groups) == 1:
            parts = [job(groups[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(groups)) as ex:
                parts = list(ex.map(job, groups))
        per_run = RunResult(
            np.concatenate([p.apriori_sq for p in parts]),
            np.concatenate([p.msd for p in parts]),
            np.concatenate([p.mse for p in parts]),
        )
    curves = {}
    tails = {}
    meta = {"runs": runs, "master_seed": int(policy.master_seed), "mu": sc.mu}
    for kind, data in (("emse", per_run.apriori_sq), ("msd", per_run.msd), ("mse", per_run.mse)):
        if iterations:
            mean = _column_fsum_mean(data)
            se = np.std(data, axis=0, ddof=1) / math.sqrt(runs) if runs > 1 else np.zeros(iterations)
            tails[kind] = tail_average(data)
        else:
            mean = se = np.empty(0)
        curves[kind] = LearningCurve(mean, kind, "simulation", std_error=se, metadata=dict(meta))
    return MonteCarloResult(
        curves["emse"],
        curves["msd"],
        curves["mse"],
        runs,
        iterations,
        tails,
        per_run if keep_runs else None,
    )


def achieved_snr_db(sc: FilterScenario):
    """``10 log10(E|u w^o|^2 / sigma_v^2)`` for the scenario as given."""
    if sc.noise_var == 0:
        return math.inf
    return 10.0 * math.log10(sc.signal_power / sc.noise_var)
