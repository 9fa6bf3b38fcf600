"""
Ratio-variable moments
======================

Closed-form distributions and moments of the ratio variables built from a
whitened regressor ``u ~ CN(0, I)`` and the eigenvalue spectrum ``lambda``::

    s_k    = |u_k|^2 / ||u||^2_L
    s_kkb  = (sqrt(l_k/l_kb) |u_k|^2 + sqrt(l_kb/l_k) |u_kb|^2) / ||u||^2_L
    r      = 1 / ||u||^2_L
    z_k    = (|u_k|^2 + 1) / ||u||^2_L

where ``||u||^2_L = sum_i l_i |u_i|^2``. Together they give every entry of
the NLMS moment matrices. Indices are zero-based throughout.

Most results are finite sums of partial-fraction terms ``p_i`` and lose
precision as eigenvalues cluster. Sums are first evaluated in double precision
with :func:`math.fsum`; when the terms cancel too heavily for the result to be
trusted, the same expression is re-evaluated in multiprecision arithmetic with
enough digits to absorb the cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import ConditioningError, DimensionError, PoleError, ValidationError
from .spectrum import SigmaKKbar, Spectrum
from ._precision import FLOAT, MP, TARGET_RELATIVE_ERROR, robust_sum
from .specfun import _2f1_eval, upper_incomplete_gamma_negone, upper_incomplete_gamma_zero

__all__ = [
    "MomentSet",
    "partial_fraction_weights",
    "cdf_sk",
    "cdf_skkbar",
    "mean_sk",
    "second_moment_sk",
    "cross_fourth_moment",
    "second_moment_skkbar",
    "cdf_r",
    "pdf_r",
    "mean_r",
    "second_moment_r",
    "pdf_ak",
    "cond_pdf_zk",
    "cond_second_moment_zk",
    "second_moment_zk",
    "derived_moments",
]

CLAMP_TOLERANCE = 1e-7
NEGATIVE_MOMENT_TOLERANCE = 1e-9


def _clamp_probability(value, what):
    if -CLAMP_TOLERANCE <= value <= 1.0 + CLAMP_TOLERANCE:
        return min(max(value, 0.0), 1.0)
    raise ConditioningError(f"{what} evaluated to {value!r}; cancellation too severe")


def _pair(s, pair):
    if isinstance(pair, SigmaKKbar):
        return pair
    k, kbar = pair
    return SigmaKKbar.of(s, k, kbar)


def _weights(ops, lam):
    # p_i = prod_{j != i} 1 / (1 - l_j / l_i)
    M = len(lam)
    return [1 / ops.prod(1 - lam[j] / lam[i] for j in range(M) if j != i) for i in range(M)]


def _lam(s, ops):
    return [ops.num(v) for v in s.values.tolist()]


def partial_fraction_weights(s: Spectrum):
    """
    Partial-fraction weights ``p_i = l_i^(M-1) / prod_{j != i} (l_i - l_j)``.

    They sum to one and are also the (signed) mixture weights of the
    hypoexponential law of ``||u||^2_L``.
    """

    def compute():
        p = np.array(_weights(FLOAT, _lam(s, FLOAT)))
        mag = float(np.sum(np.abs(p)))
        if mag * s.M * FLOAT.eps > 0.1 * TARGET_RELATIVE_ERROR:
            # product rounding in large alternating weights would break sum(p) == 1
            with mpmath.workdps(30 + int(math.log10(mag))):
                p = np.array([float(v) for v in _weights(MP, _lam(s, MP))])
        p.setflags(write=False)
        return p

    return s.memo(("p",), compute)


def _ratio_cdf_terms(ops, lam, sigma, x):
    """
    Terms of ``P(sum_i sigma_i E_i / sum_i l_i E_i <= x)`` for iid unit exponentials.

    With ``c_i = l_i x - sigma_i`` the CDF is
    ``sum_{c_i > 0} c_i^(M-1) / prod_{j != i} (c_i - c_j)``.
    """
    x = ops.num(x)
    c = [l * x - ops.num(sg) for l, sg in zip(lam, sigma)]
    M = len(c)
    terms = []
    for i in range(M):
        if c[i] <= 0:
            continue
        diffs = [c[i] - c[j] for j in range(M) if j != i]
        if any(abs(d) <= 1e-13 * max(abs(c[i]), abs(c[i] - d)) for d in diffs):
            raise PoleError(f"removable singularity of the CDF at x={float(x)!r}", x=float(x))
        terms.append(ops.prod(c[i] / d for d in diffs))
    return terms


def cdf_sk(s: Spectrum, k, x):
    """CDF of ``s_k``, supported on ``[0, 1/l_k]``."""
    k = s.check_index(k)
    x = float(x)
    if x <= 0:
        return 0.0
    if x >= 1.0 / s[k]:
        return 1.0
    sigma = [0.0] * s.M
    sigma[k] = 1.0
    value = robust_sum(lambda ops: _ratio_cdf_terms(ops, _lam(s, ops), sigma, x), s.M)
    return _clamp_probability(value, "CDF of s_k")


def cdf_skkbar(s: Spectrum, pair, x):
    """
    CDF of ``s_kkbar``, supported on ``[0, 1/sqrt(l_k l_kbar)]``.

    ``pair`` is a :class:`SigmaKKbar` or an index tuple ``(k, kbar)``.
    """
    pair = _pair(s, pair)
    x = float(x)
    if x <= 0:
        return 0.0
    if x >= 1.0 / math.sqrt(s[pair.k] * s[pair.kbar]):
        return 1.0
    k, kb = pair.k, pair.kbar

    def build(ops):
        lam = _lam(s, ops)
        sigma = [0] * s.M
        sigma[k] = ops.sqrt(lam[k] / lam[kb])
        sigma[kb] = ops.sqrt(lam[kb] / lam[k])
        return _ratio_cdf_terms(ops, lam, sigma, x)

    return _clamp_probability(robust_sum(build, s.M), "CDF of s_kkbar")


def mean_sk(s: Spectrum, k):
    """``E[s_k] = p_k/l_k + sum_{i != k} p_i ln(l_i/l_k) / (l_i - l_k)``."""
    k = s.check_index(k)

    def build(ops):
        lam = _lam(s, ops)
        p = _weights(ops, lam)
        lk = lam[k]
        terms = [p[k] / lk]
        terms += [p[i] * ops.log(lam[i] / lk) / (lam[i] - lk) for i in range(s.M) if i != k]
        return terms

    return s.memo(("mean_sk", k), lambda: robust_sum(build, s.M))


def second_moment_sk(s: Spectrum, k):
    """
    ``E[s_k^2] = p_k/l_k^2 + sum_{i != k} 2 p_i / (l_k (l_i - l_k))
    - sum_{i != k} 2 p_i ln(l_i/l_k) / (l_i - l_k)^2``.
    """
    k = s.check_index(k)

    def build(ops):
        lam = _lam(s, ops)
        p = _weights(ops, lam)
        lk = lam[k]
        terms = [p[k] / lk**2]
        for i in range(s.M):
            if i == k:
                continue
            d = lam[i] - lk
            terms.append(2 * p[i] / (lk * d))
            terms.append(-2 * p[i] * ops.log(lam[i] / lk) / d**2)
        return terms

    return s.memo(("second_sk", k), lambda: robust_sum(build, s.M))


def cross_fourth_moment(s: Spectrum, k, kbar):
    """
    ``E[|u_k|^2 |u_kbar|^2 / (||u||^2_L)^2]`` for ``k != kbar``.

    ``E[ln ||u||^2_L]`` equals the divided difference ``f[l_1, ..., l_M]`` of
    ``f(t) = t^(M-1) ln t`` (less Euler's constant). The cross moment is
    ``-d^2/dl_k dl_kbar`` of it, i.e. minus the divided difference with
    ``l_k`` and ``l_kbar`` repeated, evaluated here by residues.
    """
    k = s.check_index(k)
    kbar = s.check_index(kbar)
    if k == kbar:
        raise ValidationError("cross_fourth_moment needs k != kbar")
    key = ("cross", min(k, kbar), max(k, kbar))
    M = s.M
    geo = math.exp(float(np.mean(np.log(s.values))))

    def build(ops):
        # nodes rescaled by the geometric mean; the t^(M-1) ln(geo) part has
        # a vanishing divided difference so only the scale factor survives
        t = [v / ops.num(geo) for v in _lam(s, ops)]
        f = lambda z: z ** (M - 1) * ops.log(z)
        fp = lambda z: (M - 1) * z ** (M - 2) * ops.log(z) + z ** (M - 2)
        nodes = t + [t[k], t[kbar]]
        terms = []
        for i in range(M):
            if i in (k, kbar):
                continue
            rest = nodes[:i] + nodes[i + 1:]
            terms.append(f(t[i]) / ops.prod(t[i] - r for r in rest))
        for d, twin in ((k, M), (kbar, M + 1)):
            rest = [n for j, n in enumerate(nodes) if j not in (d, twin)]
            g = ops.prod(t[d] - r for r in rest)
            terms.append(fp(t[d]) / g)
            terms.append(-f(t[d]) * ops.fsum(1 / (t[d] - r) for r in rest) / g)
        return terms

    return s.memo(key, lambda: -robust_sum(build, M) / geo**2)


def second_moment_skkbar(s: Spectrum, pair):
    """
    ``E[s_kkbar^2] = (l_k/l_kb) E[s_k^2] + (l_kb/l_k) E[s_kb^2] + 2 E[|u_k|^2 |u_kb|^2 / (||u||^2_L)^2]``.
    """
    pair = _pair(s, pair)
    k, kb = pair.k, pair.kbar
    key = ("second_skkbar", min(k, kb), max(k, kb))

    def compute():
        a2 = s[k] / s[kb]
        return math.fsum([
            a2 * second_moment_sk(s, k),
            second_moment_sk(s, kb) / a2,
            2.0 * cross_fourth_moment(s, k, kb),
        ])

    return s.memo(key, compute)


def cdf_r(s: Spectrum, x):
    """CDF of ``r = 1/||u||^2_L``: ``sum_m p_m exp(-1/(l_m x))`` for ``x > 0``."""
    x = float(x)
    if x <= 0:
        return 0.0

    def build(ops):
        lam = _lam(s, ops)
        p = _weights(ops, lam)
        return [p[m] * ops.exp(-1 / (lam[m] * x)) for m in range(s.M)]

    return _clamp_probability(robust_sum(build, s.M), "CDF of r")


def pdf_r(s: Spectrum, x):
    """Density of ``r``, clamped at zero."""
    x = float(x)
    if x <= 0:
        return 0.0

    def build(ops):
        lam = _lam(s, ops)
        p = _weights(ops, lam)
        return [p[m] * ops.exp(-1 / (lam[m] * x)) / (lam[m] * x * x) for m in range(s.M)]

    return max(robust_sum(build, s.M), 0.0)


def _log_moment_terms(s, power, sign):
    # sign * sum_m p_m ln(l_m) / l_m^power ; logs taken relative to the
    # geometric mean, which changes nothing because sum_m p_m / l_m^power = 0
    geo = math.exp(float(np.mean(np.log(s.values))))

    def build(ops):
        lam = _lam(s, ops)
        p = _weights(ops, lam)
        g = ops.num(geo)
        return [sign * p[m] * ops.log(lam[m] / g) / lam[m] ** power for m in range(s.M)]

    return build


def mean_r(s: Spectrum):
    """``E[r] = sum_m p_m ln(l_m) / l_m``."""
    return s.memo(("mean_r",), lambda: robust_sum(_log_moment_terms(s, 1, 1), s.M))


def second_moment_r(s: Spectrum):
    """
    ``E[r^2] = -sum_m p_m ln(l_m) / l_m^2``; finite only for ``M >= 3``.

    Follows from ``E[Y^-2] = int_0^inf t E[exp(-t Y)] dt`` with the partial
    fraction expansion of ``prod_m 1/(1 + l_m t)``.
    """
    if s.M < 3:
        raise DimensionError("E[r^2] diverges for M < 3")
    return s.memo(("second_r",), lambda: robust_sum(_log_moment_terms(s, 2, -1), s.M))


def _ak_denominators(ops, lam, k):
    det = ops.prod(lam)
    M = len(lam)
    return {
        m: det * ops.prod(1 / lam[l] - 1 / lam[m] for l in range(M) if l not in (k, m))
        for m in range(M)
        if m != k
    }


def pdf_ak(s: Spectrum, k, a):
    """Density of ``a_k = sum_{m != k} |x_m|^2`` where ``x = sqrt(L) u``."""
    k = s.check_index(k)
    a = float(a)
    if a <= 0:
        return 0.0

    def build(ops):
        lam = _lam(s, ops)
        den = _ak_denominators(ops, lam, k)
        return [lam[k] * ops.exp(-a / lam[m]) / d for m, d in den.items()]

    return max(robust_sum(build, s.M), 0.0)


def cond_pdf_zk(s: Spectrum, k, a, x):
    """
    Density of ``z_k`` given ``a_k = a``.

    Supported between ``1/l_k`` and ``1/a`` whichever order they come in;
    ``|l_k - a| / (l_k x - 1)^2 * exp(-(1 - a x) / (l_k x - 1))`` inside.
    """
    k = s.check_index(k)
    a, x = float(a), float(x)
    lk = s[k]
    if not a > 0:
        raise ValidationError("a must be positive")
    if a == lk:
        raise ValidationError("z_k given a_k = l_k is a point mass; no density")
    lo, hi = sorted((1.0 / lk, 1.0 / a))
    if not lo < x < hi:
        return 0.0
    d = lk * x - 1.0
    expo = (1.0 - a * x) / d
    if expo > 745.0:
        return 0.0
    return abs(lk - a) / (d * d) * math.exp(-expo)


def cond_second_moment_zk(s: Spectrum, k, a):
    """``E[z_k^2 | a_k = a]`` in terms of ``Gamma(0, .)`` and ``Gamma(-1, .)``."""
    k = s.check_index(k)
    a = float(a)
    if not a > 0:
        raise ValidationError("a must be positive")
    lk = s[k]
    x = a / lk
    g0 = upper_incomplete_gamma_zero(x, scaled=True)
    gm1 = upper_incomplete_gamma_negone(x, scaled=True)
    d = lk - a
    return 1.0 / lk**2 + 2.0 * d / lk**3 * g0 + d * d / lk**4 * gm1


def second_moment_zk(s: Spectrum, k):
    """``E[z_k^2]`` as a finite sum of elementary and ``2F1`` terms."""
    k = s.check_index(k)
    if s.M < 3:
        raise DimensionError("E[z_k^2] diverges for M < 3")

    def build(ops):
        lam = _lam(s, ops)
        lk = lam[k]
        eps = ops.eps
        terms = []
        for m, D in _ak_denominators(ops, lam, k).items():
            lm = lam[m]
            eta = 1 - lm / lk
            f112, f113, f123, f124 = (
                _2f1_eval(key, eta, ops.log1p, eps)
                for key in ((1, 1, 2), (1, 1, 3), (1, 2, 3), (1, 2, 4))
            )
            terms.append(ops.log(lm) / D)
            terms.append(lm * (1 + f112 - f113) / (lk * D))
            terms.append(lm * lm / (lk * lk * D) * (f124 / 3 - f123))
        return terms

    return s.memo(("second_zk", k), lambda: robust_sum(build, 4 * s.M))


@dataclass(frozen=True)
class MomentSet:
    """
    All moments needed by the NLMS moment matrices.

    ``second_skkbar`` and ``cross_fourth`` are ``M x M`` symmetric arrays.
    ``cross_fourth[k, l] = E[|u_k|^2 |u_l|^2 / (||u||^2_L)^2]``; its diagonal
    holds ``E[s_k^2]`` so the array is the whitened fourth-order matrix. The
    diagonal of ``second_skkbar`` is unused and set to zero.
    ``self_weighted[k] = E[|u_k|^2 / (||u||^2_L)^2]``.
    """

    mean_sk: np.ndarray
    second_sk: np.ndarray
    second_skkbar: np.ndarray
    second_r: float
    second_zk: np.ndarray
    cross_fourth: np.ndarray
    self_weighted: np.ndarray

    @property
    def M(self):
        return len(self.mean_sk)

    def as_dict(self):
        return {
            "mean_sk": self.mean_sk,
            "second_sk": self.second_sk,
            "second_skkbar": self.second_skkbar,
            "second_r": self.second_r,
            "second_zk": self.second_zk,
            "cross_fourth": self.cross_fourth,
            "self_weighted": self.self_weighted,
        }


def _nonnegative(arr, what):
    arr = np.asarray(arr, dtype=float)
    worst = float(np.min(arr)) if arr.size else 0.0
    if worst < -NEGATIVE_MOMENT_TOLERANCE:
        raise ConditioningError(
            f"{what} evaluated to {worst:.3g} < 0; spectrum too close to degenerate"
        )
    return np.maximum(arr, 0.0)


def derived_moments(s: Spectrum) -> MomentSet:
    """Assemble the full :class:`MomentSet` for a spectrum (memoized)."""

    def compute():
        M = s.M
        lam = s.values
        m1 = np.array([mean_sk(s, k) for k in range(M)])
        m2 = np.array([second_moment_sk(s, k) for k in range(M)])
        skk = np.zeros((M, M))
        cross = np.diag(m2)
        for k in range(M):
            for kb in range(k + 1, M):
                v = second_moment_skkbar(s, (k, kb))
                skk[k, kb] = skk[kb, k] = v
                a2 = lam[k] / lam[kb]
                c = 0.5 * v - 0.5 * a2 * m2[k] - 0.5 * m2[kb] / a2
                cross[k, kb] = cross[kb, k] = c
        r2 = second_moment_r(s)
        z2 = np.array([second_moment_zk(s, k) for k in range(M)])
        selfw = 0.5 * z2 - 0.5 * m2 - 0.5 * r2
        fields = dict(
            mean_sk=_nonnegative(m1, "E[s_k]"),
            second_sk=_nonnegative(m2, "E[s_k^2]"),
            second_skkbar=_nonnegative(skk, "E[s_kkbar^2]"),
            second_r=float(_nonnegative([r2], "E[r^2]")[0]),
            second_zk=_nonnegative(z2, "E[z_k^2]"),
            cross_fourth=_nonnegative(cross, "cross fourth moment"),
            self_weighted=_nonnegative(selfw, "E[|u_k|^2/(||u||^2_L)^2]"),
        )
        for v in fields.values():
            if isinstance(v, np.ndarray):
                v.setflags(write=False)
        return MomentSet(**fields)

    return s.memo(("moment_set",), compute)
