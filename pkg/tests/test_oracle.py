import numpy as np
import pytest
import scipy.sparse as sp

from lobsim.errors import ReducibleError, StateSpaceTooLargeError
from lobsim.models import (
    PoissonK1Model,
    PoissonK1Params,
    default_model,
)
from lobsim.oracle import (
    TruncatedGenerator,
    normalize_measure,
    shape_statistics,
    stationary_solve,
    truncated_generator,
    tv_distance,
)
from lobsim.simulate import simulate
from lobsim.book import LobState


def frozen_pk1(lam=1.0, mu=2.0):
    # theta = 0 freezes the reference price (u = d = 0)
    return PoissonK1Model(PoissonK1Params(lam=lam, mu=mu, theta=0.0))


def test_row_sums_zero():
    for name in ["poisson_k1", "queue_reactive"]:
        m = default_model(name) if name != "poisson_k1" else frozen_pk1()
        cap = 3 if m.K == 1 else 2
        gen = truncated_generator(m, cap, price_mode="frozen")
        rows = np.asarray(gen.Q.sum(axis=1)).ravel()
        assert np.max(np.abs(rows)) < 1e-12


def test_birth_death_marginal():
    # per-queue birth-death: stationary marginal proportional to (lam/mu)^n
    gen = truncated_generator(frozen_pk1(), 3, price_mode="frozen")
    pi = stationary_solve(gen)
    marg = {}
    for s, p in zip(gen.states, pi):
        marg[s[1]] = marg.get(s[1], 0.0) + p
    expect = [8 / 15, 4 / 15, 2 / 15, 1 / 15]
    for n in range(4):
        assert marg[n] == pytest.approx(expect[n], abs=1e-8)


def test_joint_is_product_of_marginals():
    gen = truncated_generator(frozen_pk1(), 3, price_mode="frozen")
    pi = stationary_solve(gen)
    idx = {s: p for s, p in zip(gen.states, pi)}
    for b in range(4):
        for a in range(4):
            expect = (0.5 ** b / 1.875) * (0.5 ** a / 1.875)
            assert idx[(-b, a)] == pytest.approx(expect, abs=1e-8)


def test_degenerate_cap_zero():
    gen = truncated_generator(frozen_pk1(), 0, price_mode="frozen")
    assert len(gen.states) == 1
    # the only state is absorbing after truncation: solve is the point mass
    pi = stationary_solve(gen)
    assert pi[0] == pytest.approx(1.0)


def test_state_bound_guard():
    m = default_model("zero_intelligence")  # K = 3
    with pytest.raises(StateSpaceTooLargeError):
        truncated_generator(m, 8, state_bound=1000)


def test_reducible_guard():
    # two disconnected states
    Q = sp.csr_matrix(np.zeros((2, 2)))
    gen = TruncatedGenerator(
        states=[(0, 0), (0, 1)], index={}, Q=Q, cap=1, price_mode="frozen"
    )
    with pytest.raises(ReducibleError):
        stationary_solve(gen)


def test_uniform_complete_graph():
    n = 5
    Q = np.ones((n, n)) - n * np.eye(n)
    gen = TruncatedGenerator(
        states=[(i,) for i in range(n)],
        index={},
        Q=sp.csr_matrix(Q),
        cap=1,
        price_mode="frozen",
    )
    pi = stationary_solve(gen)
    assert np.allclose(pi, 1 / n)


def test_collapsed_mode_conserves_mass():
    m = PoissonK1Model(PoissonK1Params(lam=1.0, mu=2.0, theta=0.5))
    gen = truncated_generator(m, 4, price_mode="collapsed")
    rows = np.asarray(gen.Q.sum(axis=1)).ravel()
    assert np.max(np.abs(rows)) < 1e-12
    pi = stationary_solve(gen)
    assert pi.sum() == pytest.approx(1.0)


def test_occupation_matches_oracle_small():
    m = frozen_pk1()
    gen = truncated_generator(m, 12, price_mode="frozen")
    pi = {s: float(p) for s, p in zip(gen.states, stationary_solve(gen))}
    s = simulate(
        m,
        LobState(q=np.array([0, 0]), p_ref_half=1),
        max_events=200_000,
        seed=1,
        record_embedded=False,
    )
    occ = normalize_measure(s.occupation)
    assert tv_distance(pi, occ) < 0.02


def test_tv_distance_basics():
    assert tv_distance({1: 1.0}, {1: 1.0}) == 0.0
    assert tv_distance({1: 1.0}, {2: 1.0}) == 1.0
    assert tv_distance({1: 0.5, 2: 0.5}, {1: 1.0}) == pytest.approx(0.5)


def test_shape_statistics_point_mass():
    st = shape_statistics({(-3, 2): 1.0}, K=1)
    assert st.mean_abs_q[-1] == pytest.approx(3.0)
    assert st.mean_abs_q[1] == pytest.approx(2.0)
    assert st.spread_hist == {1: 1.0}
    assert st.i_mid_hist == {0.0: 1.0}


def test_shape_statistics_oracle_mean():
    gen = truncated_generator(frozen_pk1(), 3, price_mode="frozen")
    pi = stationary_solve(gen)
    st = shape_statistics((gen.states, pi), K=1)
    assert st.mean_abs_q[1] == pytest.approx(11 / 15, abs=1e-8)
    assert st.mean_abs_q[-1] == pytest.approx(11 / 15, abs=1e-8)


def test_shape_statistics_simulation_vs_oracle():
    m = frozen_pk1()
    gen = truncated_generator(m, 14, price_mode="frozen")
    pi = stationary_solve(gen)
    st_pi = shape_statistics((gen.states, pi), K=1)
    s = simulate(
        m,
        LobState(q=np.array([0, 0]), p_ref_half=1),
        max_events=300_000,
        seed=3,
        record_embedded=False,
    )
    st_occ = shape_statistics(s.occupation, K=1)
    for i in (-1, 1):
        assert st_occ.mean_abs_q[i] == pytest.approx(st_pi.mean_abs_q[i], rel=0.02)
