import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import energy2
from penalized_mhd.eos import (
    EosError, EosParams, default_eos, energy_density, energy_parts, maxwell_tensor, pressure,
    pressure_potential, sound_speed, viscous_stress,
)
from penalized_mhd.operators import cell_to_face


def test_pressure_examples():
    assert pressure(2.0, EosParams(1.0, 2.0)) == pytest.approx(4.0)
    assert pressure(0.0, EosParams(3.0, 1.7)) == 0.0
    assert pressure(1.0, EosParams(2.0, 1.4)) == pytest.approx(2.0)


def test_potential_examples():
    eos = EosParams(1.0, 2.0)
    assert pressure_potential(2.0, eos) == pytest.approx(4.0)
    assert pressure_potential(0.0, eos) == 0.0


@given(st.floats(0.1, 5.0), st.floats(1.05, 3.0), st.floats(0.1, 4.0))
def test_potential_defining_identity(rho, gamma, a):
    eos = EosParams(a, gamma)
    k = 1e-5
    dP = (pressure_potential(rho + k, eos) - pressure_potential(rho - k, eos)) / (2 * k)
    assert dP * rho - pressure_potential(rho, eos) == pytest.approx(float(pressure(rho, eos)), rel=1e-7)


def test_potential_identity_at_1_7():
    eos = EosParams(1.0, 1.4)
    k = 1e-6
    dP = (pressure_potential(1.7 + k, eos) - pressure_potential(1.7 - k, eos)) / (2 * k)
    assert abs(dP * 1.7 - pressure_potential(1.7, eos) - pressure(1.7, eos)) <= 1e-8


def test_sound_speed():
    assert sound_speed(1.0, EosParams(1.0, 2.0)) == pytest.approx(np.sqrt(2.0))


def test_eos_validation():
    with pytest.raises(EosError):
        EosParams(0.0, 1.4)
    with pytest.raises(EosError):
        EosParams(1.0, 1.0)
    with pytest.raises(EosError):
        EosParams(1.0, 1.4).check_dimension(3)
    with pytest.raises(EosError):
        pressure(-1.0, EosParams())
    assert default_eos(2).gamma == 1.4 and default_eos(3).gamma == pytest.approx(5 / 3)


def test_maxwell_examples():
    np.testing.assert_allclose(maxwell_tensor(np.array([1.0, 0.0]), 1.0), [[0.5, 0], [0, -0.5]])
    np.testing.assert_allclose(maxwell_tensor(np.array([1.0, 1.0]), 2.0), [[0, 2], [2, 0]])
    np.testing.assert_allclose(maxwell_tensor(np.zeros(2), 1.0), np.zeros((2, 2)))


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(0.1, 5))
def test_maxwell_symmetric_trace(H, mu):
    T = maxwell_tensor(np.array(H), mu)
    np.testing.assert_allclose(T, T.T)
    assert np.trace(T) == pytest.approx(mu * (1 - 3 / 2) * np.dot(H, H), abs=1e-12)


def test_viscous_stress_examples():
    I2 = np.eye(2)
    np.testing.assert_allclose(viscous_stress(I2, 1.0, 0.0, 2), np.zeros((2, 2)), atol=1e-15)
    np.testing.assert_allclose(viscous_stress(I2, 0.0, 3.0, 2), 6 * I2)
    np.testing.assert_allclose(viscous_stress(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0, 5.0, 2),
                               [[0, 2], [2, 0]])


def test_energy_examples():
    n, L = 8, 1.0
    h = 2 * L / n
    vol = h * h
    eos = EosParams(1.0, 2.0)
    mu_f = np.ones((2, n, n))
    e = energy_parts(np.ones((n, n)), np.zeros((2, n, n)), np.zeros((2, n, n)), mu_f, eos, vol)
    assert e.internal == pytest.approx((2 * L) ** 2) and e.kinetic == 0 and e.magnetic == 0
    B = np.zeros((2, n, n))
    B[0] = 1.0
    e = energy_parts(np.zeros((n, n)), np.zeros((2, n, n)), B, mu_f, eos, vol)
    assert e.total == pytest.approx(0.5 * (2 * L) ** 2)
    m = np.zeros((2, n, n))
    m[1, 2, 3] = 1.0
    e = energy_parts(np.zeros((n, n)), m, B, mu_f, eos, vol)
    assert not e.valid and e.total == float("inf")


def test_energy_matches_loop_oracle():
    rng = np.random.default_rng(3)
    n = 10
    h = 0.2
    rho = 1 + 0.5 * rng.random((n, n))
    m = rng.standard_normal((2, n, n))
    B = rng.standard_normal((2, n, n))
    mu_f = cell_to_face(1 + rng.random((n, n)))
    e = energy_parts(rho, m, B, mu_f, EosParams(1.3, 1.6), h * h)
    assert e.total == pytest.approx(energy2(rho, m, B, mu_f, 1.3, 1.6, h), rel=1e-13)


@given(st.floats(0.05, 4), st.floats(-3, 3), st.floats(0.05, 4), st.floats(-3, 3), st.floats(0, 1))
def test_energy_density_convex_along_segments(r0, m0, r1, m1, s):
    """Convexity in (rho, m, H) on random segments."""
    eos = EosParams(1.0, 1.4)
    H0, H1 = np.array([0.3]), np.array([-1.0])
    f = lambda r, m, H: float(energy_density(np.array(r), np.array([m]), H, 1.5, eos))  # noqa: E731
    mid = f((1 - s) * r0 + s * r1, (1 - s) * m0 + s * m1, (1 - s) * H0 + s * H1)
    assert mid <= (1 - s) * f(r0, m0, H0) + s * f(r1, m1, H1) + 1e-10
