"""
Brute-force moment oracle
=========================

Estimates every ratio-variable moment directly from samples of a whitened
regressor ``u ~ CN(0, I)``, independently of the closed forms in
:mod:`nlmsmoments.eigmoments`. Standard errors come from batch means; each
batch draws from its own stream, and batch results are combined with exactly
rounded sums so estimates do not depend on the thread schedule.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .spectrum import SigmaKKbar, Spectrum

__all__ = [
    "MomentEstimate",
    "OracleMomentSet",
    "EmpiricalCDF",
    "estimate_moment_set",
    "empirical_cdf",
    "sample_ratio_variables",
    "dkw_epsilon",
]

MIN_SAMPLES = 10_000
DEFAULT_BATCHES = 100
# rows per vectorized chunk; bounds peak memory at roughly CHUNK * M * M doubles
CHUNK = 1 << 16


@dataclass(frozen=True)
class MomentEstimate:
    """
    Sample mean with its batch-mean standard error.

    ``value`` and ``std_error`` are floats for scalar moments and arrays of
    matching shape for indexed families such as ``E[s_k]``.
    """

    value: object
    std_error: object
    samples: int

    def z_score(self, reference):
        """``(reference - value) / std_error``, elementwise."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.asarray(reference) - np.asarray(self.value)) / np.asarray(self.std_error)


@dataclass(frozen=True)
class OracleMomentSet:
    """
    Oracle estimates mirroring :class:`~nlmsmoments.eigmoments.MomentSet`.

    ``cross_fourth`` and ``self_weighted`` are measured directly from their
    defining ratios. ``cross_fourth_combined`` and ``self_weighted_combined``
    rebuild the same quantities from the ``s``, ``s_kkbar``, ``r`` and ``z``
    estimates, batch by batch, so their standard errors include correlations.
    """

    mean_sk: MomentEstimate
    second_sk: MomentEstimate
    second_skkbar: MomentEstimate
    second_r: MomentEstimate
    mean_r: MomentEstimate
    second_zk: MomentEstimate
    cross_fourth: MomentEstimate
    self_weighted: MomentEstimate
    cross_fourth_combined: MomentEstimate
    self_weighted_combined: MomentEstimate
    weighted_mean_sum: MomentEstimate

    def items(self):
        return [(name, getattr(self, name)) for name in self.__dataclass_fields__]


def _energies(rng, n, M):
    # |u_k|^2 for u_k = (x + iy)/sqrt(2), x, y ~ N(0, 1)
    u = rng.standard_normal((n, M, 2))
    return 0.5 * (u[..., 0] ** 2 + u[..., 1] ** 2)


def sample_ratio_variables(s: Spectrum, n, rng):
    """
    Draw ``n`` whitened regressors and return ``(E, Y)`` with
    ``E[:, k] = |u_k|^2`` and ``Y = sum_k lambda_k |u_k|^2``.
    """
    E = _energies(rng, int(n), s.M)
    return E, E @ np.asarray(s.values)


def _batch_sums(lam, pairs, n, rng):
    """Sums over ``n`` samples of every per-sample quantity, in fixed chunk order."""
    M = lam.size
    ki, li = pairs
    a = np.sqrt(lam[ki] / lam[li])
    acc = {
        "s": np.zeros(M),
        "s2": np.zeros(M),
        "skk2": np.zeros(ki.size),
        "r": 0.0,
        "r2": 0.0,
        "z2": np.zeros(M),
        "cross": np.zeros((M, M)),
        "selfw": np.zeros(M),
    }
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        E = _energies(rng, m, M)
        Y = E @ lam
        r = 1.0 / Y
        sk = E * r[:, None]
        acc["s"] += sk.sum(axis=0)
        acc["s2"] += (sk * sk).sum(axis=0)
        skk = a * sk[:, ki] + sk[:, li] / a
        acc["skk2"] += (skk * skk).sum(axis=0)
        acc["r"] += r.sum()
        acc["r2"] += (r * r).sum()
        z = (E + 1.0) * r[:, None]
        acc["z2"] += (z * z).sum(axis=0)
        acc["cross"] += sk.T @ sk
        acc["selfw"] += (sk * r[:, None]).sum(axis=0)
        done += m
    return {key: np.asarray(v) / n for key, v in acc.items()}


def _split(samples, batches):
    base, extra = divmod(samples, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def _estimate(stack, weights, samples):
    """Weighted mean across batches and its batch-mean standard error."""
    stack = np.asarray(stack, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    shape = stack.shape[1:]
    flat = stack.reshape(stack.shape[0], -1)
    mean = np.array([math.fsum(col) for col in (flat * w[:, None]).T])
    B = stack.shape[0]
    dev = flat - mean
    var = np.array([math.fsum(col) for col in (w[:, None] * dev * dev).T]) * B / (B - 1)
    se = np.sqrt(var / B)
    if shape == ():
        return MomentEstimate(float(mean[0]), float(se[0]), samples)
    return MomentEstimate(mean.reshape(shape), se.reshape(shape), samples)


def estimate_moment_set(s: Spectrum, samples, seed, batches=DEFAULT_BATCHES, workers=1):
    """
    Monte-Carlo estimates of every ratio-variable moment.

    Parameters
    ----------
    s: Spectrum
    samples: int
        Total number of regressor draws, at least 10^4.
    seed: int
        Master seed; batch ``b`` uses the stream spawned with key ``(b,)``.
    batches: int, optional
        Number of batch means used for the standard errors.
    workers: int, optional
        Threads used to process batches; results do not depend on it.

    Returns
    -------
    OracleMomentSet
        Pair-indexed quantities (``second_skkbar``, ``cross_fourth`` and its
        combined form) are ``M x M`` symmetric arrays with a zero diagonal
        for ``second_skkbar`` and ``E[s_k^2]`` on the diagonal of the others.
    """
    samples = int(samples)
    batches = int(batches)
    if samples < MIN_SAMPLES:
        raise ValidationError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    if not 2 <= batches <= samples:
        raise ValidationError("batches must lie between 2 and samples")
    seed = int(seed)
    lam = np.asarray(s.values, dtype=float)
    M = lam.size
    ki, li = np.triu_indices(M, 1)
    sizes = _split(samples, batches)

    def job(b):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        return _batch_sums(lam, (ki, li), sizes[b], rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            parts = list(ex.map(job, range(batches)))
    else:
        parts = [job(b) for b in range(batches)]

    def field(key):
        return np.stack([p[key] for p in parts])

    a2 = lam[ki] / lam[li]
    skk_full, comb_full = [], []
    for p in parts:
        sq = np.zeros((M, M))
        sq[ki, li] = sq[li, ki] = p["skk2"]
        skk_full.append(sq)
        c = np.diag(p["s2"]).astype(float)
        vals = 0.5 * p["skk2"] - 0.5 * a2 * p["s2"][ki] - 0.5 * p["s2"][li] / a2
        c[ki, li] = c[li, ki] = vals
        comb_full.append(c)
    selfw_comb = [0.5 * p["z2"] - 0.5 * p["s2"] - 0.5 * p["r2"] for p in parts]
    wsum = [float(lam @ p["s"]) for p in parts]
    est = lambda stack: _estimate(stack, sizes, samples)  # noqa: E731
    return OracleMomentSet(
        mean_sk=est(field("s")),
        second_sk=est(field("s2")),
        second_skkbar=est(np.stack(skk_full)),
        second_r=est(field("r2")),
        mean_r=est(field("r")),
        second_zk=est(field("z2")),
        cross_fourth=est(field("cross")),
        self_weighted=est(field("selfw")),
        cross_fourth_combined=est(np.stack(comb_full)),
        self_weighted_combined=est(np.stack(selfw_comb)),
        weighted_mean_sum=est(np.array(wsum)),
    )


def dkw_epsilon(samples, confidence=0.99):
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band at the given confidence."""
    if not 0 < confidence < 1:
        raise ValidationError("confidence must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * int(samples)))


@dataclass(frozen=True)
class EmpiricalCDF:
    grid: np.ndarray
    values: np.ndarray
    samples: int
    band: float
    confidence: float

    def sup_distance(self, other):
        return float(np.max(np.abs(np.asarray(other, dtype=float) - self.values)))


VARIABLES = ("s_k", "s_kkbar", "r")


def _draw_variable(variable, s, n, rng, index):
    E, Y = sample_ratio_variables(s, n, rng)
    if variable == "s_k":
        k = s.check_index(index)
        return E[:, k] / Y
    if variable == "s_kkbar":
        pair = index if isinstance(index, SigmaKKbar) else SigmaKKbar.of(s, *index)
        return (pair.sigma_vector(s.M) @ E.T) / Y
    return 1.0 / Y


def empirical_cdf(variable, s: Spectrum, samples, grid, seed, index=None, confidence=0.99):
    """
    Empirical CDF of ``s_k``, ``s_kkbar`` or ``r`` on a sorted grid.

    Parameters
    ----------
    variable: {"s_k", "s_kkbar", "r"}
    s: Spectrum
    samples: int
    grid: array_like
        Sorted evaluation points. Points outside the support simply give 0 or 1.
    seed: int
    index: int or (int, int), optional
        ``k`` for ``s_k``; the pair ``(k, kbar)`` for ``s_kkbar``.
    confidence: float, optional
        Confidence level of the reported DKW band.
    """
    if variable not in VARIABLES:
        raise ValidationError(f"variable must be one of {VARIABLES}, got {variable!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or not np.all(np.isfinite(grid)):
        raise ValidationError("grid must be a finite one-dimensional sequence")
    if np.any(np.diff(grid) < 0):
        raise ValidationError("grid must be sorted")
    samples = int(samples)
    if samples < 1:
        raise ValidationError("samples must be positive")
    if variable != "r" and index is None:
        raise ValidationError(f"{variable} needs an index")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    chunks = []
    done = 0
    while done < samples:
        m = min(CHUNK * 4, samples - done)
        chunks.append(_draw_variable(variable, s, m, rng, index))
        done += m
    x = np.sort(np.concatenate(chunks))
    values = np.searchsorted(x, grid, side="right") / samples
    return EmpiricalCDF(grid, values, samples, dkw_epsilon(samples, confidence), confidence)
