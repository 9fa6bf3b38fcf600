"""
Special functions
=================

Scalar special functions used by the closed-form moment expressions:
the upper incomplete gamma function at orders 0 and -1, the Gauss
hypergeometric function for the handful of parameter triples that appear
in the second moment of ``z_k``, and the Euler beta function.

All functions are pure. Out-of-domain arguments raise
:class:`~nlmsmoments.errors.ValidationError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = [
    "HypParams",
    "SUPPORTED_2F1",
    "upper_incomplete_gamma_zero",
    "upper_incomplete_gamma_negone",
    "gauss_2f1",
    "beta_fn",
]

EULER_GAMMA = 0.57721566490153286060651209008240243

_EPS = 2.0**-53
_TINY = 1e-300


def _check_positive(x, name="x"):
    if not (x > 0) or not math.isfinite(x):
        raise ValidationError(f"{name} must be a finite positive number, got {x!r}")


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{n>=1} (-x)^n / (n n!)
    total = 0.0
    term = 1.0
    n = 1
    while True:
        term *= -x / n
        inc = term / n
        total += inc
        if abs(inc) <= _EPS * abs(total) or n > 200:
            break
        n += 1
    return -EULER_GAMMA - math.log(x) - total


def _e1_scaled_cf(x):
    """Return exp(x) * E1(x) by modified Lentz evaluation of the continued fraction."""
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError("continued fraction for E1 failed to converge")  # pragma: no cover


def upper_incomplete_gamma_zero(x, scaled=False):
    """
    Upper incomplete gamma function of order zero, ``Gamma(0, x) = E1(x)``.

    Parameters
    ----------
    x: float
        Positive argument.
    scaled: bool, optional
        If True return ``exp(x) * Gamma(0, x)``, which stays finite for large
        ``x`` where the unscaled value underflows.

    Returns
    -------
    float
    """
    _check_positive(x)
    if x < 1.0:
        value = _e1_series(x)
        return value * math.exp(x) if scaled else value
    h = _e1_scaled_cf(x)
    if scaled:
        return h
    # exp(-x) underflows to zero past ~745, which is the intended limit
    return h * math.exp(-x)


def upper_incomplete_gamma_negone(x, scaled=False):
    """
    ``Gamma(-1, x)`` through the recurrence ``Gamma(-1, x) = exp(-x)/x - Gamma(0, x)``.

    With ``scaled=True`` returns ``exp(x) * Gamma(-1, x) = 1/x - exp(x) Gamma(0, x)``.
    """
    _check_positive(x)
    if scaled:
        return 1.0 / x - upper_incomplete_gamma_zero(x, scaled=True)
    return math.exp(-x) / x - upper_incomplete_gamma_zero(x)


@dataclass(frozen=True)
class HypParams:
    """Parameters ``(alpha, beta; gamma)`` of the Gauss hypergeometric function."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.gamma > self.beta > 0):
            raise ValidationError(
                f"integral representation needs gamma > beta > 0, got {self.as_tuple()}"
            )

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


SUPPORTED_2F1 = frozenset({(1, 1, 2), (1, 1, 3), (1, 2, 3), (1, 2, 4)})

# below this |z| the elementary forms cancel badly; the power series is used instead
_SERIES_RADIUS = 0.5


def _2f1_series(b, c, z, eps=_EPS):
    # alpha = 1 for every supported triple, so (alpha)_n / n! == 1
    total = 1.0 + 0 * z
    term = total
    n = 0
    while True:
        term = term * z * (b + n) / (c + n)
        total += term
        n += 1
        if abs(term) <= eps * abs(total) or n > 2000:
            return total


def _2f1_closed(key, z, log1p=math.log1p):
    log1mz = log1p(-z)
    if key == (1, 1, 2):
        return -log1mz / z
    if key == (1, 1, 3):
        return 2 * (z + (1 - z) * log1mz) / (z * z)
    if key == (1, 2, 3):
        return -2 * (z + log1mz) / (z * z)
    # (1, 2, 4)
    return 6 * (z - z * z / 2 + (1 - z) * log1mz) / (z * z * z)


def _2f1_eval(key, z, log1p=math.log1p, eps=_EPS):
    """Unchecked evaluation; also used with multiprecision ``z``."""
    if abs(z) < _SERIES_RADIUS:
        return _2f1_series(key[1], key[2], z, eps)
    return _2f1_closed(key, z, log1p)


def gauss_2f1(p, z):
    """
    Gauss hypergeometric function ``2F1(alpha, beta; gamma; z)`` for real ``z < 1``.

    Only the triples in :data:`SUPPORTED_2F1` are implemented. Each has an
    elementary closed form in ``log(1 - z)``, which is used away from the
    origin; a power series is used for ``|z| < 0.5``.

    Parameters
    ----------
    p: HypParams or tuple of 3 numbers
    z: float
        Argument, any real value below 1.
    """
    if not isinstance(p, HypParams):
        p = HypParams(*p)
    key = tuple(int(v) if float(v).is_integer() else v for v in p.as_tuple())
    if key not in SUPPORTED_2F1:
        raise ValidationError(f"unsupported 2F1 parameters {p.as_tuple()}")
    if not (z < 1) or not math.isfinite(z):
        raise ValidationError(f"2F1 argument must satisfy z < 1, got {z!r}")
    return _2f1_eval(key, z)


def beta_fn(x, y):
    """Euler beta function ``B(x, y)`` for positive real arguments."""
    _check_positive(x, "x")
    _check_positive(y, "y")
    if x + y < 170.0:
        return math.gamma(x) * math.gamma(y) / math.gamma(x + y)
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))
