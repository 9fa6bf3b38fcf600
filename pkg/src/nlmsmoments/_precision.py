"""
Cancellation-aware evaluation of finite sums.

The closed forms are alternating partial-fraction sums whose terms grow like
``1 / prod(l_i - l_j)``. A sum is first evaluated in double precision; when
the cancellation ratio ``sum|t| / |sum t|`` says the result cannot be
trusted, the same term builder is re-run in mpmath at a working precision
large enough to absorb it.
"""
from __future__ import annotations

import math

import mpmath

_EPS = 2.0**-53
# accept a double-precision sum when its estimated relative error is below this
TARGET_RELATIVE_ERROR = 1e-13
_MAX_DPS = 400


class FloatOps:
    """Numeric namespace for the double-precision pass."""

    eps = _EPS
    num = staticmethod(float)
    log = staticmethod(math.log)
    log1p = staticmethod(math.log1p)
    exp = staticmethod(math.exp)
    sqrt = staticmethod(math.sqrt)
    fsum = staticmethod(math.fsum)

    @staticmethod
    def prod(values):
        out = 1.0
        for v in values:
            out *= v
        return out


class MpOps:
    """Numeric namespace backed by mpmath at the current working precision."""

    num = staticmethod(mpmath.mpf)
    log = staticmethod(mpmath.log)
    log1p = staticmethod(mpmath.log1p)
    exp = staticmethod(mpmath.exp)
    sqrt = staticmethod(mpmath.sqrt)
    fsum = staticmethod(mpmath.fsum)

    @property
    def eps(self):
        return mpmath.mp.eps

    @staticmethod
    def prod(values):
        out = mpmath.mpf(1)
        for v in values:
            out *= v
        return out


FLOAT = FloatOps()
MP = MpOps()


def _cancellation(terms, ops):
    total = ops.fsum(terms)
    mag = ops.fsum(abs(t) for t in terms)
    if mag == 0:
        return total, 1.0
    if total == 0:
        return total, math.inf
    return total, float(mag / abs(total))


def robust_sum(builder, n_ops=1):
    """
    Evaluate ``sum(builder(ops))`` to near double precision.

    Parameters
    ----------
    builder: callable
        ``builder(ops)`` returns the list of terms computed with the numeric
        namespace ``ops`` (``FLOAT`` or ``MP``).
    n_ops: int
        Rough count of rounding steps per term; scales the error estimate.

    Returns
    -------
    float
    """
    terms = builder(FLOAT)
    total, cond = _cancellation(terms, FLOAT)
    if math.isfinite(total) and cond * _EPS * (4 + n_ops) < TARGET_RELATIVE_ERROR:
        return float(total)
    digits = 30 if not math.isfinite(cond) else 20 + int(math.ceil(math.log10(cond)))
    while True:
        with mpmath.workdps(digits):
            terms = builder(MP)
            total, cond = _cancellation(terms, MP)
            needed = 20 + (int(math.ceil(math.log10(cond))) if math.isfinite(cond) else digits)
        if needed <= digits or digits >= _MAX_DPS:
            return float(total)
        digits = min(2 * digits, max(needed, digits + 10), _MAX_DPS)
