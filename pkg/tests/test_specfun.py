import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

import oracles
from nlmsmoments.errors import ValidationError
from nlmsmoments.specfun import (
    SUPPORTED_2F1,
    HypParams,
    beta_fn,
    gauss_2f1,
    upper_incomplete_gamma_negone,
    upper_incomplete_gamma_zero,
)

X_GRID = np.concatenate([np.logspace(-10, -1, 10), np.linspace(0.2, 3, 15), np.logspace(0.5, 2.85, 10)])


@pytest.mark.parametrize("x", X_GRID)
def test_gamma_zero_matches_mpmath(x):
    assert upper_incomplete_gamma_zero(x) == pytest.approx(oracles.gammainc_upper(0, x), rel=2e-14)


@pytest.mark.parametrize("x", X_GRID)
def test_gamma_zero_matches_scipy_exp1(x):
    assert upper_incomplete_gamma_zero(x) == pytest.approx(special.exp1(x), rel=1e-13)


@pytest.mark.parametrize("x", [1e-6, 0.5, 1.0, 30.0, 700.0, 1e4, 1e8])
def test_scaled_gamma_zero(x):
    import mpmath

    ref = float(mpmath.exp(x) * mpmath.gammainc(0, x))
    assert upper_incomplete_gamma_zero(x, scaled=True) == pytest.approx(ref, rel=1e-13)


def test_gamma_zero_underflows_gracefully():
    assert upper_incomplete_gamma_zero(800.0) == 0.0
    assert upper_incomplete_gamma_zero(800.0, scaled=True) > 0


@pytest.mark.parametrize("x", X_GRID)
def test_gamma_negone_matches_mpmath(x):
    ref = oracles.gammainc_upper(-1, x)
    # the recurrence subtracts two values of size exp(-x)/x; about log10(x) digits cancel
    assert upper_incomplete_gamma_negone(x) == pytest.approx(ref, rel=1e-13 * max(1.0, x))


@pytest.mark.parametrize("x", [1e-3, 0.7, 5.0, 300.0, 5e3])
def test_scaled_gamma_negone(x):
    import mpmath

    with mpmath.workdps(40):
        ref = float(mpmath.exp(x) * mpmath.gammainc(-1, x))
    assert upper_incomplete_gamma_negone(x, scaled=True) == pytest.approx(ref, rel=1e-12 * max(1.0, x))


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_gamma_rejects_bad_arguments(bad):
    with pytest.raises(ValidationError):
        upper_incomplete_gamma_zero(bad)
    with pytest.raises(ValidationError):
        upper_incomplete_gamma_negone(bad)


Z_GRID = [-200.0, -20.0, -3.0, -1.0, -0.6, -0.49, -0.1, -1e-6, 0.0, 1e-9, 0.3, 0.49, 0.51, 0.9, 0.999, 0.999999]


@pytest.mark.parametrize("params", sorted(SUPPORTED_2F1))
@pytest.mark.parametrize("z", Z_GRID)
def test_2f1_matches_mpmath(params, z):
    assert gauss_2f1(params, z) == pytest.approx(oracles.hyp2f1(*params, z), rel=1e-12)


def test_2f1_accepts_hypparams_and_float_triples():
    assert gauss_2f1(HypParams(1, 2, 4), 0.25) == gauss_2f1((1.0, 2.0, 4.0), 0.25)


@pytest.mark.parametrize("params", [(1, 3, 4), (2, 1, 2), (0.5, 1, 2)])
def test_2f1_rejects_unsupported(params):
    with pytest.raises(ValidationError):
        gauss_2f1(params, 0.1)


@pytest.mark.parametrize("z", [1.0, 1.5, math.nan, -math.inf])
def test_2f1_rejects_bad_argument(z):
    with pytest.raises(ValidationError):
        gauss_2f1((1, 1, 2), z)


def test_hypparams_requires_gamma_above_beta():
    with pytest.raises(ValidationError):
        HypParams(1, 2, 2)
    with pytest.raises(ValidationError):
        HypParams(1, 0, 2)


@pytest.mark.parametrize("x,y", [(0.5, 0.5), (1, 1), (2.5, 7), (1e-3, 3), (100, 100), (150, 60)])
def test_beta_matches_scipy(x, y):
    ref = math.exp(special.betaln(x, y))
    assert beta_fn(x, y) == pytest.approx(ref, rel=1e-12)


def test_beta_rejects_nonpositive():
    with pytest.raises(ValidationError):
        beta_fn(0, 1)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-8, 600), st.floats(1.0001, 1.5))
def test_gamma_zero_is_decreasing(x, f):
    assert upper_incomplete_gamma_zero(x * f) < upper_incomplete_gamma_zero(x)


@settings(max_examples=60, deadline=None)
@given(st.floats(-1e3, 0.9999))
def test_2f1_112_is_positive_and_increasing(z):
    a = gauss_2f1((1, 1, 2), z)
    assert a > 0
    assert gauss_2f1((1, 1, 2), z + 0.5 * (1 - z)) >= a
