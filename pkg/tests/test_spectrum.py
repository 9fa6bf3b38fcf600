import math
import threading

import numpy as np
import pytest

from nlmsmoments.errors import ValidationError
from nlmsmoments.spectrum import SigmaKKbar, Spectrum


def test_keeps_given_order_and_is_read_only():
    s = Spectrum([1.0, 3.0, 2.0])
    assert list(s) == [1.0, 3.0, 2.0]
    assert s.M == len(s) == 3
    with pytest.raises(ValueError):
        s.values[0] = 5.0


@pytest.mark.parametrize("bad", [[1, 2], [1, 2, -1], [1, 2, 0], [1, 2, math.nan], [1, 2, math.inf]])
def test_rejects_invalid(bad):
    with pytest.raises(ValidationError):
        Spectrum(bad)


def test_relaxed_allows_two():
    assert Spectrum.relaxed([2.0, 1.0]).M == 2
    with pytest.raises(ValidationError):
        Spectrum.relaxed([1.0])


def test_rejects_clusters_without_spread():
    with pytest.raises(ValidationError, match="spread"):
        Spectrum([1.0, 1.0 + 1e-9, 2.0])


def test_spread_separates_and_keeps_trace():
    lam = [1.0, 1.0 + 1e-9, 1.0 + 2e-9, 2.0, 2.0]
    s = Spectrum(lam, gap_tolerance=1e-4, spread=True)
    v = np.sort(s.values)
    assert np.min(np.diff(v) / v[1:]) >= 1e-4
    assert s.values.sum() == pytest.approx(sum(lam), rel=1e-14)
    assert s.spread_applied
    np.testing.assert_allclose(s.values - np.array(lam), s.perturbation)
    assert np.max(np.abs(s.perturbation)) < 1e-3


def test_spread_is_noop_on_separated_values():
    s = Spectrum([3.0, 2.0, 1.0], spread=True)
    assert not s.spread_applied
    assert np.all(s.perturbation == 0)


def test_check_index():
    s = Spectrum([3.0, 2.0, 1.0])
    assert s.check_index(2) == 2
    for k in (-1, 3):
        with pytest.raises(ValidationError):
            s.check_index(k)


def test_equality_hash_scaled_permuted():
    s = Spectrum([3.0, 2.0, 1.0])
    assert s == Spectrum([3.0, 2.0, 1.0])
    assert hash(s) == hash(Spectrum([3.0, 2.0, 1.0]))
    assert s.scaled(2.0) == Spectrum([6.0, 4.0, 2.0])
    assert s.permuted([2, 0, 1]) == Spectrum([1.0, 3.0, 2.0])


def test_memo_computes_once_under_contention():
    s = Spectrum([3.0, 2.0, 1.0])
    calls = []

    def fn():
        calls.append(1)
        return 42

    threads = [threading.Thread(target=lambda: s.memo(("x",), fn)) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert s.memo(("x",), fn) == 42
    assert len(calls) == 1


def test_sigma_kkbar():
    s = Spectrum([4.0, 2.0, 1.0])
    p = SigmaKKbar.of(s, 0, 2)
    assert p.values == (2.0, 0.5)
    np.testing.assert_array_equal(p.sigma_vector(3), [2.0, 0.0, 0.5])
    with pytest.raises(ValidationError):
        SigmaKKbar.of(s, 1, 1)
    with pytest.raises(ValidationError):
        SigmaKKbar.of(s, 0, 5)
