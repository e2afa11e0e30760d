import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatrep.forms import ext_deriv
from quatrep.kernels import (
    AdmissibilityError, KernelSingularity, LerayMap, difference_map, elementary_form, kernel,
    leray_eta, leray_phi, leray_phi_bar, theta_pair, theta_z, v_rho, v_rho_map,
)
from quatrep.quat import E, I, J, scalar_product


def sphere_rho(x):
    return (np.asarray(x) ** 2).sum(axis=(-1, -2)) - 1


def _pair(seed, n=1, min_dist=0.5):
    rng = np.random.default_rng(seed)
    while True:
        zeta, z = rng.standard_normal((2, n, 4))
        if np.linalg.norm(zeta - z) >= min_dist:
            return zeta, z


def test_theta_degree_and_dimension():
    zeta, z = _pair(0)
    th = theta_z(zeta, z)
    assert th.dim == 4 and th.degrees() == {3}
    zeta2, z2 = _pair(1, n=2)
    assert theta_z(zeta2, z2).degrees() == {7}
    tb = theta_pair(zeta, z, variant="bar")
    assert tb.dim == 8 and tb.degrees() == {3}


def test_theta_scaling():
    z = np.zeros((1, 4))
    d = np.array([[0.3, -0.5, 0.2, 0.6]])
    d /= np.linalg.norm(d)
    a = theta_z(d * 0.5, z)
    b = theta_z(d * 2.0, z)
    # coefficients are homogeneous of degree -3 in zeta - z
    for idx, c in a.terms.items():
        assert np.allclose(c, b.coefficient(idx) * 4 ** 3, atol=1e-12)


def test_theta_closed_away_from_pole():
    rng = np.random.default_rng(5)
    z = np.zeros((1, 4))
    worst = 0.0
    for _ in range(100):
        p = rng.standard_normal(4)
        p *= max(1.0, 0.5 / np.linalg.norm(p))
        d = ext_deriv(lambda x: theta_z(np.asarray(x).reshape(1, 4), z), p)
        worst = max(worst, d.max_abs())
    assert worst <= 1e-6


def test_volume_derivative_of_rescaled_kernel():
    # d(|zeta - z|^4 theta_z) is a constant multiple of the volume form: 1 / vol(B^4)
    z = np.array([[0.1, 0.0, -0.2, 0.3]])
    for p in (np.array([0.3, 0.5, -0.2, 0.7]), np.array([1.0, 0.1, 0.2, -0.4])):
        d = ext_deriv(lambda x: theta_z(np.asarray(x).reshape(1, 4), z)
                      * float(np.sum((np.asarray(x) - z[0]) ** 2) ** 2), p)
        assert np.allclose(d.coefficient((0, 1, 2, 3)), 2 / math.pi ** 2 * E, atol=1e-6)


def test_theta_bar_closed_jointly():
    zeta, z = _pair(3)
    p = np.concatenate([zeta.reshape(-1), z.reshape(-1)])
    d = ext_deriv(lambda x: theta_pair(x[:4].reshape(1, 4), x[4:].reshape(1, 4), variant="bar"), p)
    assert d.max_abs() <= 1e-6


def test_paired_kernel_collapses_to_theta_z():
    zeta, z = _pair(4)
    paired = theta_pair(zeta, z, variant="paired")
    frozen = paired.without(range(4, 8)).restrict_dim(4)
    assert (frozen - theta_z(zeta, z)).max_abs() < 1e-12


def test_elementary_forms():
    e = np.array([[1.0, 0, 0, 0]])
    assert (elementary_form("omega1", 1, e) - elementary_form("omega1", 1, 2 * e) * 0.5).max_abs() < 1e-15
    with pytest.raises(ValueError):
        elementary_form("omega3", 1, e)


@given(st.integers(0, 10_000), st.floats(0, 1))
def test_leray_eta_normalization(seed, lam):
    zeta, z = _pair(seed, n=2, min_dist=0.1)
    psi = v_rho_map(sphere_rho, grad=lambda x: 2 * np.asarray(x))
    try:
        eta = leray_eta(psi, zeta, z, lam)
    except AdmissibilityError:
        return
    assert np.abs(scalar_product(eta, zeta - z) - E).max() < 1e-12


def test_leray_eta_special_cases():
    zeta, z = _pair(7)
    d = zeta - z
    one = leray_eta(difference_map(), zeta, z, 1.0)
    assert np.allclose(one, d / np.sum(d * d))
    assert np.allclose(leray_eta(difference_map(), zeta, z, 0.3), one)
    with pytest.raises(KernelSingularity):
        leray_eta(difference_map(), z, z, 0.5)
    orth = LerayMap(psi=lambda a, b: np.zeros_like(np.asarray(a)))
    with pytest.raises(AdmissibilityError):
        leray_eta(orth, zeta, z, 0.0)


def test_leray_phi_collapse_and_endpoints():
    rng = np.random.default_rng(11)
    psi = v_rho_map(sphere_rho, grad=lambda x: 2 * np.asarray(x))
    for _ in range(20):
        zeta, z = rng.standard_normal((2, 1, 4))
        th = theta_z(zeta, z)
        assert (leray_phi(difference_map(), zeta, z) - th).max_abs() < 1e-12
        top = leray_phi_bar(psi, zeta, z, 1.0).without([4]).restrict_dim(4)
        assert (top - th).max_abs() < 1e-12
        bottom = leray_phi_bar(psi, zeta, z, 0.0).without([4]).restrict_dim(4)
        assert (bottom - leray_phi(psi, zeta, z)).max_abs() < 1e-12


def test_leray_phi_on_sphere_is_finite():
    e = np.array([[1.0, 0, 0, 0]])
    psi = v_rho_map(sphere_rho, grad=lambda x: 2 * np.asarray(x))
    val = leray_phi(psi, e, 0 * e)
    assert np.isfinite(val.max_abs()) and val.max_abs() > 0
    assert (val - theta_z(e, 0 * e)).max_abs() < 1e-12


def test_v_rho_oracles():
    rng = np.random.default_rng(2)
    z = rng.standard_normal((2, 4))
    assert np.allclose(v_rho(sphere_rho, z), 2 * z, atol=1e-8)
    assert np.allclose(v_rho(lambda x: np.asarray(x)[..., 0, 0], z[:1]), [[1, 0, 0, 0]])


def test_kernel_dispatch():
    zeta, z = _pair(9)
    assert (kernel("theta_z", zeta, z) - theta_z(zeta, z)).max_abs() == 0
    with pytest.raises(ValueError):
        kernel("phi", zeta, z)
    with pytest.raises(ValueError):
        kernel("nope", zeta, z)
