import numpy as np
import pytest

from lobsim.distributions import GeometricBook, GeometricBoundary


def test_boundary_pmf_sums_to_one():
    d = GeometricBoundary(0.4, +1)
    assert sum(d.pmf(l) for l in range(0, 200)) == pytest.approx(1.0)
    assert d.pmf(-1) == 0.0


def test_boundary_sign_convention():
    d = GeometricBoundary(0.5, -1)
    rng = np.random.default_rng(0)
    samples = [d.sample(rng) for _ in range(1000)]
    assert all(s <= 0 for s in samples)
    assert d.pmf(-2) == pytest.approx(0.5 ** 3)
    assert d.pmf(1) == 0.0


def test_boundary_moment_analytic():
    d = GeometricBoundary(0.5, +1)
    z, U = 1.2, 2
    rng = np.random.default_rng(1)
    emp = np.mean([z ** (abs(d.sample(rng)) - U) for _ in range(200_000)])
    assert d.moment(z, U) == pytest.approx(emp, rel=0.02)
    assert d.z_radius == pytest.approx(2.0)
    assert d.moment(2.5, 0) == np.inf


def test_book_samples_in_state_space():
    from lobsim.book import in_state_space

    d = GeometricBook(3, 0.5)
    rng = np.random.default_rng(2)
    for _ in range(500):
        q = d.sample(rng)
        assert in_state_space(q, 3)
        assert all(q[:3] <= 0) and all(q[3:] >= 0)


def test_book_pmf_product():
    d = GeometricBook(1, 0.5)
    assert d.pmf((-1, 2)) == pytest.approx(0.5 ** 2 * 0.5 ** 3)
    assert d.pmf((1, 2)) == 0.0
    assert d.marginal_pmf(0, -1) == pytest.approx(0.25)


def test_book_v_moment_analytic():
    d = GeometricBook(2, 0.5)
    z, U = 1.2, 3
    rng = np.random.default_rng(3)
    emp = np.mean(
        [sum(z ** (abs(int(x)) - U) for x in d.sample(rng)) for _ in range(100_000)]
    )
    assert d.v_moment(z, U) == pytest.approx(emp, rel=0.02)
