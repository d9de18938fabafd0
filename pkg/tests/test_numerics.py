"""Unit tests for the shared numerical helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvspin import numerics
from nvspin.errors import DegenerateNullspace, InsufficientDecay


def test_vec_unvec_roundtrip():
    rng = np.random.default_rng(0)
    rho = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert np.array_equal(numerics.unvec(numerics.vec(rho)), rho)


def test_vec_kron_identity():
    # vec(A rho B) = (B^T (x) A) vec(rho), the defining property used to
    # assemble superoperators
    rng = np.random.default_rng(1)
    a, b, rho = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
                 for _ in range(3))
    lhs = numerics.vec(a @ rho @ b)
    rhs = numerics.kron(b.T, a) @ numerics.vec(rho)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_nullspace_steady_rate_matrix():
    # two-level rate matrix with known stationary distribution
    k = np.array([[-2.0, 3.0], [2.0, -3.0]])
    p = numerics.nullspace_steady(k, kind="rate")
    np.testing.assert_allclose(p, [0.6, 0.4], atol=1e-13)


def test_nullspace_steady_degenerate_raises():
    # block-diagonal generator: two independent stationary states
    k = np.zeros((4, 4))
    k[:2, :2] = [[-1.0, 1.0], [1.0, -1.0]]
    k[2:, 2:] = [[-2.0, 2.0], [2.0, -2.0]]
    with pytest.raises(DegenerateNullspace):
        numerics.nullspace_steady(k, kind="rate")


def test_resolvent_solve_matches_direct_inverse():
    rng = np.random.default_rng(2)
    lmat = rng.normal(size=(6, 6))
    lmat -= 5.0 * np.eye(6)  # push the spectrum away from i*omega
    rhs = rng.normal(size=6)
    omega = 1.3
    got = numerics.resolvent_solve(lmat, omega, rhs)
    want = np.linalg.solve(lmat - 1j * omega * np.eye(6), rhs)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_fit_decay_pure_exponential():
    t = np.linspace(0.0, 10.0, 200)
    fit = numerics.fit_decay(t, 0.7 * np.exp(-0.45 * t))
    assert fit.rate == pytest.approx(0.45, rel=1e-8)
    assert fit.amplitude == pytest.approx(0.7, rel=1e-6)
    assert fit.frequency == 0.0


def test_fit_decay_damped_cosine():
    t = np.linspace(0.0, 30.0, 4000)
    y = 0.5 * np.exp(-0.3 * t) * np.cos(4.0 * t)
    fit = numerics.fit_decay(t, y, oscillatory=True)
    assert fit.rate == pytest.approx(0.3, rel=1e-3)
    assert fit.frequency == pytest.approx(4.0, rel=1e-3)


def test_fit_decay_insufficient_decay():
    t = np.linspace(0.0, 1.0, 50)
    with pytest.raises(InsufficientDecay):
        numerics.fit_decay(t, np.exp(-1e-4 * t))


@settings(max_examples=25, deadline=None)
@given(rate=st.floats(0.1, 10.0), amp=st.floats(0.1, 5.0))
def test_fit_decay_recovers_random_exponentials(rate, amp):
    t = np.linspace(0.0, 8.0 / rate, 400)
    fit = numerics.fit_decay(t, amp * np.exp(-rate * t))
    assert fit.rate == pytest.approx(rate, rel=1e-6)
