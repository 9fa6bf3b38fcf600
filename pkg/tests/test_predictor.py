import numpy as np
import pytest

from nlmsmoments.errors import InstabilityError, ValidationError
from nlmsmoments.momentmat import toeplitz_covariance
from nlmsmoments.predictor import FilterScenario, learning_curve, stability, steady_state, tracking_emse

W = [0.227, 0.460, 0.688, 0.460, 0.227]


@pytest.fixture
def sc():
    return FilterScenario(W, 0.1, 0.01, toeplitz_covariance(5, 0.5))


def test_initial_values(sc):
    R = sc.input_cov.matrix
    w = np.array(W)
    assert learning_curve(sc, 1, "emse").values[0] == pytest.approx(w @ R @ w, rel=1e-12)
    assert learning_curve(sc, 1, "msd").values[0] == pytest.approx(w @ w, rel=1e-12)
    assert sc.signal_power == pytest.approx(w @ R @ w)


def test_curves_converge_to_steady_state(sc):
    for kind in ("emse", "msd", "mse"):
        curve = learning_curve(sc, 5000, kind)
        assert curve.values[-1] == pytest.approx(steady_state(sc, kind), rel=1e-9)
        assert curve.source == "theory" and len(curve) == 5000


def test_mse_is_emse_plus_noise(sc):
    np.testing.assert_allclose(
        learning_curve(sc, 50, "mse").values, learning_curve(sc, 50, "emse").values + 0.01, rtol=1e-14
    )
    assert steady_state(sc, "mse") == pytest.approx(steady_state(sc) + 0.01)


def test_curve_is_recursion(sc):
    # v_{i+1} = |w|^2_{F h_i} + ..., so successive differences obey the same F
    m = sc.matrices
    w2 = np.abs(sc.rotated_w_opt) ** 2
    lam = np.array(sc.spectrum.values)
    c = np.diag(m.C)
    h, g = lam.copy(), np.zeros(5)
    ref = []
    for _ in range(20):
        ref.append(w2 @ h + 0.01 * 0.01 * c @ g)
        g = lam + m.F @ g
        h = m.F @ h
    np.testing.assert_allclose(learning_curve(sc, 20).values, ref, rtol=1e-13)


def test_db_and_empty(sc):
    c = learning_curve(sc, 3)
    np.testing.assert_allclose(c.db(), 10 * np.log10(c.values))
    assert len(learning_curve(sc, 0)) == 0


def test_steady_state_scales_with_noise(sc):
    a = steady_state(sc)
    b = steady_state(sc.replace(noise_var=0.04))
    assert b == pytest.approx(4 * a, rel=1e-12)
    assert steady_state(sc.replace(noise_var=0.0)) == 0.0


def test_smaller_step_smaller_excess(sc):
    assert steady_state(sc.replace(mu=0.01)) < steady_state(sc)


def test_tracking(sc):
    assert tracking_emse(sc) == pytest.approx(steady_state(sc), rel=1e-12)
    walk = sc.replace(walk_cov=1e-6 * np.eye(5))
    assert tracking_emse(walk) > steady_state(sc)
    # the walk term grows as the step shrinks
    small = walk.replace(mu=0.01)
    assert tracking_emse(small) - steady_state(small.replace(walk_cov=None)) > tracking_emse(walk) - steady_state(sc)
    with pytest.raises(ValidationError):
        learning_curve(walk, 10)


def test_stability(sc):
    rep = stability(sc)
    assert rep.meansq_bound == pytest.approx(2.0, rel=1e-9)
    assert rep.mean_bound >= 2.0
    assert rep.stable and rep.mu == 0.1
    assert not stability(sc.replace(mu=2.2)).stable
    with pytest.raises(InstabilityError):
        steady_state(sc.replace(mu=2.2))
    with pytest.raises(InstabilityError):
        tracking_emse(sc.replace(mu=0.0))


def test_unstable_curve_grows(sc):
    v = learning_curve(sc.replace(mu=3.0), 2000).values
    assert v[-1] > 10 * v[0]


def test_complex_covariance_rotation():
    R = np.array([[2.0, 0.6j, 0.1], [-0.6j, 1.5, 0.2j], [0.1, -0.2j, 1.0]])
    w = np.array([1 + 1j, -0.5, 0.25j])
    sc = FilterScenario(w, 0.2, 0.01, R)
    # E|u w|^2 = w^H R^T w with R(i, j) = E[u_i conj(u_j)]
    assert learning_curve(sc, 1).values[0] == pytest.approx(np.real(w.conj() @ R.T @ w), rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(w_opt=[1, 2], mu=0.1, noise_var=0.01),
        dict(w_opt=W, mu=-0.1, noise_var=0.01),
        dict(w_opt=W, mu=np.nan, noise_var=0.01),
        dict(w_opt=W, mu=0.1, noise_var=-1.0),
        dict(w_opt=W, mu=0.1, noise_var=0.01, walk_cov=np.eye(4)),
        dict(w_opt=W, mu=0.1, noise_var=0.01, walk_cov=-np.eye(5)),
        dict(w_opt=W, mu=0.1, noise_var=0.01, walk_cov=np.triu(np.ones((5, 5)))),
    ],
)
def test_scenario_validation(kwargs):
    with pytest.raises(ValidationError):
        FilterScenario(input_cov=toeplitz_covariance(5, 0.5), **kwargs)


def test_bad_kind(sc):
    with pytest.raises(ValidationError):
        learning_curve(sc, 10, "snr")
    with pytest.raises(ValidationError):
        steady_state(sc, "snr")
    with pytest.raises(ValidationError):
        learning_curve(sc, -1)
