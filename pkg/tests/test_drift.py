import numpy as np
import pytest

from lobsim.drift import (
    check_assumptions,
    drift_check_ctmc,
    drift_check_embedded,
    lyapunov,
    qv_ctmc,
    scan_states,
)
from lobsim.errors import (
    DivergentBoundaryMomentError,
    EmptyScanError,
    RadiusExceededError,
)
from lobsim.models import (
    PoissonK1Model,
    PoissonK1Params,
    QueueReactiveModel,
    QueueReactiveParams,
    default_model,
)

ALL_NAMES = ["poisson_k1", "poisson_k", "zero_intelligence", "queue_reactive"]


def pk1(lam=1.0, mu=2.0):
    return PoissonK1Model(PoissonK1Params(lam=lam, mu=mu, theta=0.5))


def test_lyapunov_value():
    assert lyapunov([-3, 2], 1.1, 2) == pytest.approx(1.1 ** 1 + 1.1 ** 0)


def test_qv_matches_hand_computation():
    # q=[-2,3], z, U: transitions (inc 1, rate 1), (dec 1, rate 2),
    # (inc -1, rate 2), (dec -1, rate 1); no price moves
    m = pk1()
    z, U = 1.2, 2
    q = np.array([-2, 3])
    expected = (
        1 * (z ** (4 - U) - z ** (3 - U))
        + 2 * (z ** (2 - U) - z ** (3 - U))
        + 2 * (z ** (1 - U) - z ** (2 - U))
        + 1 * (z ** (3 - U) - z ** (2 - U))
    )
    assert qv_ctmc(m, q, z, U) == pytest.approx(expected)


def test_scan_exhaustive_small_box():
    m = pk1()
    scan = scan_states(m, cap=4)
    # support {q_-1 <= 0 <= q_1} inside the box: 5 * 5 states
    assert len(scan) == 25
    assert all(s[0] <= 0 <= s[1] for s in scan)


def test_scan_sampled_large_box_is_deterministic():
    m = default_model("poisson_k")
    a = scan_states(m, cap=30, max_states=2000, seed=5)
    b = scan_states(m, cap=30, max_states=2000, seed=5)
    assert a == b
    assert len(a) >= 2000
    assert any(max(abs(x) for x in s) == 30 for s in a)


def test_drift_ctmc_holds_for_stable_params():
    m = pk1()
    cert = drift_check_ctmc(m, 1.2, 2, scan_states(m, cap=30))
    assert not cert.violated
    assert cert.gamma_hat > 0
    assert cert.holds()


def test_drift_ctmc_detects_unstable_params():
    # lambda > mu forced through the constructor: drift positive at large q
    m = pk1(lam=2.0, mu=1.0)
    cert = drift_check_ctmc(m, 1.2, 2, scan_states(m, cap=30))
    assert cert.violated
    assert max(abs(x) for x in cert.worst_state) > 5


def test_drift_certificate_is_sound():
    # re-check, not re-fit: QV <= -gamma V + B holds exactly on the scan
    m = pk1()
    scan = scan_states(m, cap=30)
    cert = drift_check_ctmc(m, 1.1, 5, scan)
    rng = np.random.default_rng(0)
    idx = rng.choice(len(scan), size=min(1000, len(scan)), replace=False)
    for k in idx:
        q = scan[k]
        v = lyapunov(q, 1.1, 5)
        assert qv_ctmc(m, q, 1.1, 5) <= -cert.gamma_hat * v + cert.B_hat + 1e-9


def test_drift_empty_scan():
    with pytest.raises(EmptyScanError):
        drift_check_ctmc(pk1(), 1.1, 5, [])


def test_drift_radius_guard():
    m = pk1()
    m.z_max = 1.05
    with pytest.raises(RadiusExceededError):
        drift_check_ctmc(m, 1.2, 2, scan_states(m, cap=5))


def test_drift_embedded_holds():
    m = pk1()
    cert = drift_check_embedded(m, 1.2, 2, scan_states(m, cap=30), mc_draws=20_000)
    assert not cert.violated
    assert cert.gamma_hat > 0
    assert cert.kind == "embedded"
    assert all(se >= 0 for se in cert.moment_stderr.values())


def test_drift_embedded_moment_radius_guard():
    # geometric with p=0.2 has moment radius 1.25 < requested z
    m = PoissonK1Model(PoissonK1Params(lam=1.0, mu=2.0, theta=0.5, reinit_p=0.2))
    with pytest.raises(DivergentBoundaryMomentError):
        drift_check_embedded(m, 1.3, 2, scan_states(m, cap=10))


def test_drift_embedded_flags_price_only_states():
    # u = d = huge constant swamps the pure jumps: the price-jump
    # proportion approaches 1 everywhere and the certificate flags it
    big = 1e12
    m = PoissonK1Model(
        PoissonK1Params(lam=1.0, mu=2.0, theta=0.5),
        ud_override=(lambda q: big, lambda q: big),
    )
    cert = drift_check_embedded(m, 1.2, 2, scan_states(m, cap=10))
    assert not cert.assumption8_ok
    assert cert.violated
    assert cert.assumption8_witness is not None


def test_check_assumptions_zoo_defaults():
    for name in ALL_NAMES:
        m = default_model(name)
        rep = check_assumptions(m, scan_states(m, cap=12, max_states=3000))
        assert rep.all_ok(), f"{name}: {rep.entries}"
        assert rep.entries[3]["L"] > 0
        assert rep.entries[9]["m"] > 0


def test_check_assumptions_flags_unstable_queue_reactive():
    # lambda_1(x) > mu_1(x) for all x: the tail drift bracket is positive
    m = QueueReactiveModel(
        QueueReactiveParams(
            K=1,
            lam_tables=[[2.0, 2.0, 2.0]],
            mu_tables=[[0.0, 0.5, 0.5]],
            theta=0.4,
        )
    )
    rep = check_assumptions(m, scan_states(m, cap=12))
    assert rep.entries[4]["status"] == "violated"
    assert rep.entries[4]["witness"] is not None
    assert not rep.all_ok()


def test_check_assumptions_structural_violation():
    # a depletion rate that can flip a queue sign violates the shape rule
    class BadShape(PoissonK1Model):
        def g(self, i, q, n):
            if n != 1:
                return 0.0
            return self.mu if i == 1 else self.lam

        def transitions(self, q):
            from lobsim.book import DECREASE, INCREASE

            return [
                (INCREASE, 1, 1, self.lam),
                (DECREASE, 1, 1, self.mu),
                (INCREASE, -1, 1, self.mu),
                (DECREASE, -1, 1, self.lam),
            ]

        def in_support(self, q):
            from lobsim.book import in_state_space

            return in_state_space(q, 1)

    m = BadShape(PoissonK1Params(lam=1.0, mu=2.0, theta=0.0))
    rep = check_assumptions(m, scan_states(m, cap=6))
    assert rep.entries[2]["status"] == "violated"
    assert rep.entries[2]["witness"] is not None


def test_zoo_ctmc_certificates_default_grid_point():
    for name in ALL_NAMES:
        m = default_model(name)
        cert = drift_check_ctmc(m, 1.1, 5, scan_states(m, cap=15, max_states=3000))
        assert cert.holds(), f"{name}: gamma={cert.gamma_hat}, worst={cert.worst_state}"
