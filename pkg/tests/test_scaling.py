import numpy as np
import pytest

from lobsim.errors import WindowTooLargeError
from lobsim.models import PoissonK1Model, PoissonK1Params, default_model
from lobsim.scaling import (
    autocovariance,
    batch_means_variance,
    mean_with_stderr,
    scaling_report,
    sigma2_series,
)


def test_autocovariance_matches_direct():
    rng = np.random.default_rng(0)
    x = rng.normal(size=2000)
    acov = autocovariance(x, 5)
    xc = x - x.mean()
    for k in range(6):
        direct = np.dot(xc[: len(x) - k], xc[k:]) / len(x)
        assert acov[k] == pytest.approx(direct, abs=1e-10)


def test_sigma2_iid_signs():
    # i.i.d. +-1 equiprobable: sigma2 = 1, lag terms vanish
    rng = np.random.default_rng(1)
    c = rng.choice([-1.0, 1.0], size=500_000)
    sigma2, acov, diag = sigma2_series(c)
    assert sigma2 == pytest.approx(1.0, rel=0.02)
    assert np.max(np.abs(acov[1:])) < 0.01


def test_sigma2_alternating_sequence():
    # perfect negative correlation: the tapered sum telescopes toward 0
    # as the window grows (the true long-run variance is 0)
    c = np.tile([1.0, -1.0], 50_000)
    s20, _, _ = sigma2_series(c, lag_window=20)
    s100, _, _ = sigma2_series(c, lag_window=100)
    assert abs(s20) < 0.06
    assert abs(s100) < abs(s20)
    assert abs(s100) < 0.02


def test_sigma2_window_guards():
    with pytest.raises(WindowTooLargeError):
        sigma2_series(np.ones(50))
    with pytest.raises(WindowTooLargeError):
        sigma2_series(np.random.default_rng(0).normal(size=1000), lag_window=500)


def test_sigma2_reversed_sequence_symmetry():
    rng = np.random.default_rng(2)
    # an AR(1)-like correlated series
    c = np.zeros(100_000)
    eps = rng.normal(size=len(c))
    for k in range(1, len(c)):
        c[k] = 0.5 * c[k - 1] + eps[k]
    M = 40
    a, _, _ = sigma2_series(c, lag_window=M)
    b, _, _ = sigma2_series(c[::-1], lag_window=M)
    assert a == pytest.approx(b, rel=1e-10)


def test_batch_means_agrees_on_iid():
    rng = np.random.default_rng(3)
    c = rng.choice([-1.0, 1.0], size=400_000)
    v, b = batch_means_variance(c, n_blocks=400)
    assert v == pytest.approx(1.0, rel=0.15)
    assert b == 1000


def test_mean_with_stderr_covers_truth():
    rng = np.random.default_rng(4)
    x = rng.normal(loc=0.3, size=100_000)
    m, se = mean_with_stderr(x)
    assert abs(m - 0.3) <= 4 * se


def test_scaling_report_symmetric_pk1():
    m = PoissonK1Model(PoissonK1Params(lam=1.0, mu=2.0, theta=0.5))
    rep = scaling_report(
        m,
        np.array([0, 0]),
        n_events=400_000,
        n_paths=300,
        n_grid=(1_000, 10_000),
        t_grid=(0.5, 1.0),
        seed=10,
    )
    assert not rep.nonzero_drift
    assert rep.sigma2_event == pytest.approx(rep.sigma2_direct, rel=0.15)
    assert rep.sigma2_calendar == pytest.approx(rep.sigma2_event / rep.e_tau)
    for ratio in rep.variance_ratios.values():
        assert ratio == pytest.approx(1.0, abs=0.25)
    d = rep.to_dict()
    assert d["n_paths"] == 300
    assert "1000,0.5" in d["variance_ratios"]


def test_scaling_report_detects_drift():
    # u always on, d always off: every price move is up
    m = PoissonK1Model(
        PoissonK1Params(lam=1.0, mu=2.0, theta=0.5),
        ud_override=(lambda q: 0.5, lambda q: 0.0),
    )
    rep = scaling_report(
        m,
        np.array([0, 0]),
        n_events=200_000,
        n_paths=4,
        n_grid=(1_000,),
        t_grid=(1.0,),
        seed=11,
    )
    assert rep.nonzero_drift
    assert rep.mean_c > 0


def test_scaling_report_generic_path_model():
    # a model without a compiled kernel exercises the generic fallback
    m = default_model("queue_reactive")
    rep = scaling_report(
        m,
        np.zeros(2 * m.K, dtype=np.int64),
        n_events=30_000,
        burn_in=2_000,
        n_paths=40,
        n_grid=(200,),
        t_grid=(1.0,),
        seed=12,
    )
    assert rep.sigma2_event > 0
    assert rep.e_tau > 0
    assert len(rep.rescaled_terminal) == 40
