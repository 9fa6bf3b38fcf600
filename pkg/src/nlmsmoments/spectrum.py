"""Eigenvalue spectrum of the input autocorrelation matrix."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["Spectrum", "SigmaKKbar", "DEFAULT_GAP_TOLERANCE"]

DEFAULT_GAP_TOLERANCE = 1e-6


def _min_relative_gap(values):
    v = np.sort(values)
    if len(v) < 2:
        return math.inf
    return float(np.min(np.diff(v) / v[1:]))


def _spread(values, tol):
    """
    Push apart eigenvalues closer than ``tol`` (relative), preserving each
    cluster's mean and hence the trace.
    """
    v = np.asarray(values, dtype=float).copy()
    step = 1.01 * tol
    for _ in range(100):
        order = np.argsort(v)
        s = v[order]
        clusters = []
        start = 0
        for i in range(1, len(s) + 1):
            if i == len(s) or (s[i] - s[i - 1]) / s[i] >= tol:
                if i - start > 1:
                    clusters.append(order[start:i])
                start = i
        if not clusters:
            return v
        for idx in clusters:
            # keep the original relative order inside the cluster
            idx = idx[np.argsort(v[idx], kind="stable")]
            center = v[idx].mean()
            n = len(idx)
            offsets = (np.arange(n) - (n - 1) / 2.0) * step * center
            v[idx] = center + offsets
        step *= 1.5
    raise ValidationError("could not spread clustered eigenvalues")  # pragma: no cover


class Spectrum:
    """
    Validated sequence of distinct positive eigenvalues ``lambda_1 ... lambda_M``.

    Eigenvalues keep the order they were given in; every per-index result is
    reported in that order. ``M >= 3`` is required because ``E[r^2]`` and
    ``E[z_k^2]`` diverge for shorter filters.

    Parameters
    ----------
    eigenvalues: array_like
        Positive finite eigenvalues.
    gap_tolerance: float, optional
        Minimum pairwise relative gap ``|l_i - l_j| / max(l_i, l_j)``.
    spread: bool, optional
        If True, clustered eigenvalues are pushed apart by ``gap_tolerance``
        instead of being rejected. The applied shift is kept in
        :attr:`perturbation`.
    """

    _MIN_DIM = 3

    def __init__(self, eigenvalues, gap_tolerance=DEFAULT_GAP_TOLERANCE, spread=False):
        self._init(eigenvalues, gap_tolerance, spread, self._MIN_DIM)

    @classmethod
    def relaxed(cls, eigenvalues, gap_tolerance=DEFAULT_GAP_TOLERANCE):
        """
        Build a spectrum with ``M = 2`` allowed.

        Meant for checking the ``s_k`` formulas at ``M = 2``; moments of ``r``
        and ``z_k`` still refuse such spectra.
        """
        obj = cls.__new__(cls)
        obj._init(eigenvalues, gap_tolerance, False, 2)
        return obj

    def _init(self, eigenvalues, gap_tolerance, spread, min_dim):
        lam = np.array(eigenvalues, dtype=float).reshape(-1)
        if lam.size < min_dim:
            raise ValidationError(f"need at least {min_dim} eigenvalues, got {lam.size}")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise ValidationError("eigenvalues must be finite and positive")
        if not gap_tolerance > 0:
            raise ValidationError("gap_tolerance must be positive")
        original = lam.copy()
        if spread:
            lam = _spread(lam, gap_tolerance)
        gap = _min_relative_gap(lam)
        if gap < gap_tolerance:
            raise ValidationError(
                f"eigenvalues not distinct enough: min relative gap {gap:.3g} < {gap_tolerance:.3g}"
                " (use spread=True to perturb clusters)"
            )
        lam.setflags(write=False)
        pert = lam - original
        pert.setflags(write=False)
        self._values = lam
        self.gap_tolerance = float(gap_tolerance)
        self.perturbation = pert
        self.spread_applied = bool(np.any(pert != 0))
        self._cache = {}
        self._lock = threading.RLock()

    @property
    def values(self):
        """Read-only numpy array of eigenvalues."""
        return self._values

    @property
    def M(self):
        return self._values.size

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values.tolist())

    def __getitem__(self, i):
        return float(self._values[i])

    def __repr__(self):
        return f"Spectrum({self._values.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, Spectrum) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def check_index(self, k):
        k = int(k)
        if not 0 <= k < self.M:
            raise ValidationError(f"index {k} out of range for M={self.M}")
        return k

    def memo(self, key, fn):
        """Return the cached value for ``key``, computing it with ``fn()`` once."""
        try:
            return self._cache[key]
        except KeyError:
            pass
        with self._lock:
            if key not in self._cache:
                self._cache[key] = fn()
            return self._cache[key]

    def scaled(self, c):
        """Spectrum with every eigenvalue multiplied by ``c``."""
        return Spectrum(self._values * c, gap_tolerance=self.gap_tolerance)

    def permuted(self, perm):
        return Spectrum(self._values[np.asarray(perm)], gap_tolerance=self.gap_tolerance)


@dataclass(frozen=True)
class SigmaKKbar:
    """
    The two nonzero diagonal entries ``sqrt(l_k/l_kbar)`` and ``sqrt(l_kbar/l_k)``
    of the numerator weighting of ``s_kkbar``.
    """

    k: int
    kbar: int
    values: tuple

    @classmethod
    def of(cls, spectrum, k, kbar):
        k = spectrum.check_index(k)
        kbar = spectrum.check_index(kbar)
        if k == kbar:
            raise ValidationError("s_kkbar needs two distinct indices")
        lk, lb = spectrum[k], spectrum[kbar]
        return cls(k, kbar, (math.sqrt(lk / lb), math.sqrt(lb / lk)))

    def sigma_vector(self, M):
        sig = np.zeros(M)
        sig[self.k], sig[self.kbar] = self.values
        return sig
