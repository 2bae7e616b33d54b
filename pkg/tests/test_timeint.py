"""Generalized-alpha time integration tests."""

import numpy as np
import pytest

from gebeam import so3, timeint


def test_derived_params_limits():
    # [DERIVED] closed forms of the spectral-radius parametrization
    p = timeint.derive_params(1.0, dt=0.1)
    assert np.isclose(p.alpha_m, 0.5) and np.isclose(p.alpha_f, 0.5)
    assert np.isclose(p.gamma, 0.5) and np.isclose(p.beta, 0.25)
    p = timeint.derive_params(0.0, dt=0.1)
    assert np.isclose(p.alpha_m, -1.0) and np.isclose(p.alpha_f, 0.0)
    assert np.isclose(p.gamma, 1.5) and np.isclose(p.beta, 1.0)


def test_newmark_special_case():
    p = timeint.newmark_params(dt=0.2)
    assert p.alpha_m == 0.0 and p.alpha_f == 0.0
    assert np.isclose(p.gamma, 0.5) and np.isclose(p.beta, 0.25)


def test_update_rates_constant_velocity():
    # [DERIVED] exact for linear motion: x = v dt with zero accelerations
    p = timeint.derive_params(0.8, dt=0.3)
    v0 = np.array([1.0, -2.0, 0.5])
    z = np.zeros(3)
    v, a = timeint.update_rates(p, p.dt * v0, v0, z, z)
    assert np.allclose(v, v0, atol=1e-14)
    assert np.allclose(a, 0.0, atol=1e-14)


def test_update_rates_constant_acceleration_newmark():
    # [DERIVED] trapezoidal rule reproduces uniform acceleration exactly
    p = timeint.newmark_params(dt=0.25)
    a0 = np.array([0.0, 3.0, -1.0])
    v0 = np.array([1.0, 0.0, 2.0])
    u = v0 * p.dt + 0.5 * a0 * p.dt**2
    v, a = timeint.update_rates(p, u, v0, a0, a0)
    assert np.allclose(a, a0, atol=1e-13)
    assert np.allclose(v, v0 + a0 * p.dt, atol=1e-13)


def test_advance_modified_recursion():
    # [TRIVIAL] (1 - am) amod_{n+1} + am amod_n == (1 - af) a_{n+1} + af a_n
    p = timeint.derive_params(0.7, dt=0.1)
    rng = np.random.default_rng(0)
    a_n, amod_n, a_new = rng.normal(size=(3, 5, 3))
    amod = timeint.advance_modified(p, a_new, a_n, amod_n)
    lhs = (1 - p.alpha_m) * amod + p.alpha_m * amod_n
    rhs = (1 - p.alpha_f) * a_new + p.alpha_f * a_n
    assert np.allclose(lhs, rhs, atol=1e-14)


def _oscillator(rho_inf, dt, T=2.0, omega=3.0):
    """Integrate u'' = -omega^2 u, u(0)=1, u'(0)=0 with the one-step
    scheme: the equilibrium at t_{n+1} is linear in u_{n+1}."""
    p = timeint.derive_params(rho_inf, dt=dt)
    c = p.coeffs
    u, v, a, amod = 1.0, 0.0, -omega**2, -omega**2
    t = 0.0
    while t < T - 1e-12:
        hist = c["ca_v"] * v + c["ca_am"] * amod + c["ca_a"] * a
        du = -(hist + omega**2 * u) / (c["ca_u"] + omega**2)
        v1, a1 = timeint.update_rates(p, np.array([du]), np.array([v]),
                                      np.array([a]), np.array([amod]))
        amod = float(timeint.advance_modified(p, a1, np.array([a]),
                                              np.array([amod]))[0])
        u, v, a = u + du, float(v1[0]), float(a1[0])
        t += dt
    return u


def test_oscillator_second_order():
    # [DERIVED] exact solution cos(omega t); observed order ~2 for rho < 1
    omega, T = 3.0, 2.0
    exact = np.cos(omega * T)
    errs = [abs(_oscillator(0.9, dt, T=T, omega=omega) - exact)
            for dt in (0.02, 0.01, 0.005)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.7) and np.all(orders < 2.3)


def test_oscillator_undamped_rho_one():
    # rho_inf = 1: no numerical dissipation, amplitude preserved
    u = _oscillator(1.0, 0.001, T=2.0)
    assert abs(u - np.cos(6.0)) < 5e-4


def test_step_rotation_increment():
    lam_n = np.eye(3)
    lam1 = so3.exp_map(np.array([0.0, 0, 0.5]))
    theta = timeint.step_rotation_increment(lam_n, lam1)
    assert np.allclose(theta, [0, 0, 0.5], atol=1e-14)
    lam_big = so3.exp_map(np.array([0.0, 0, 2.0]))
    with pytest.raises(timeint.RotationIncrementTooLarge):
        timeint.step_rotation_increment(lam_n, lam_big, limit=1.5)
    lam_pi = so3.exp_map(np.array([0.0, 0, np.pi]))
    with pytest.raises(timeint.RotationIncrementTooLarge):
        timeint.step_rotation_increment(lam_n, lam_pi)


def test_rotation_principal_axis_spin():
    # [DERIVED] free spin about a principal axis: W constant; integrating
    # Lambda_{n+1} = Lambda_n exp(W dt) keeps update_rates at (W, 0)
    p = timeint.derive_params(1.0, dt=0.05)
    W0 = np.array([0.0, 0, 2.0])
    lam = np.eye(3)
    W, A, Amod = W0.copy(), np.zeros(3), np.zeros(3)
    for _ in range(10):
        lam1 = lam @ so3.exp_map(W0 * p.dt)
        theta = timeint.step_rotation_increment(lam, lam1)
        W1, A1 = timeint.update_rates(p, theta, W, A, Amod)
        assert np.allclose(W1, W0, atol=1e-12)
        assert np.allclose(A1, 0.0, atol=1e-11)
        Amod = timeint.advance_modified(p, A1, A, Amod)
        lam, W, A = lam1, W1, A1


def test_coeffs_consistency():
    # velocity/acceleration coefficient identities of the Newmark family
    p = timeint.derive_params(0.85, dt=0.4)
    c = p.coeffs
    assert np.isclose(c["cv_u"], p.gamma / (p.beta * p.dt))
    assert np.isclose(c["cv_v"], 1 - p.gamma / p.beta)
    assert np.isclose(c["cv_am"], p.dt * (1 - p.gamma / (2 * p.beta)))
    fac = (1 - p.alpha_m) / ((1 - p.alpha_f) * p.beta * p.dt**2)
    assert np.isclose(c["ca_u"], fac)
