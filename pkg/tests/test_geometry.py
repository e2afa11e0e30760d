import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatrep.geometry import (
    NoSeparation, closest_hull_point, hull_estimate, in_convex_hull, leray_margin, line_laplacian,
    plurisubharmonic_check, separating_exponential, strict_convexity,
)
from quatrep.quat import E, K, hpoint


def norm2(x):
    return np.sum(np.asarray(x) ** 2, axis=(-1, -2))


def sphere_rho(x):
    return norm2(x) - 1


def test_strict_convexity_examples(rng):
    pts = rng.standard_normal((20, 1, 4))
    rep = strict_convexity(sphere_rho, pts)
    assert abs(rep.eps0 - 2) <= 1e-6 and rep.passed
    saddle = strict_convexity(lambda x: np.asarray(x)[..., 0, 0] ** 2 - np.asarray(x)[..., 0, 1] ** 2, pts)
    assert not saddle.passed
    quartic = strict_convexity(lambda x: norm2(x) + 0.1 * np.asarray(x)[..., 0, 0] ** 4, pts)
    assert quartic.eps0 >= 2 - 1e-6
    assert rep.to_csv().startswith("eps0")


def test_leray_margin_exact(rng):
    zeta, z = rng.standard_normal((2, 200, 1, 4))
    m = leray_margin(sphere_rho, zeta, z, 2.0)
    exact = np.sum((zeta - z) ** 2, axis=(-1, -2)) / 2
    assert np.abs(m - exact).max() <= 1e-10
    assert np.abs(leray_margin(sphere_rho, zeta, zeta, 2.0)).max() <= 1e-12
    on_sphere = zeta / np.sqrt(norm2(zeta))[:, None, None]
    assert leray_margin(sphere_rho, on_sphere, z, 2.0, grad=lambda x: 2 * x).min() >= -1e-12


def test_psh_examples(rng):
    bases = rng.standard_normal((3, 2, 4))
    dirs = rng.standard_normal((3, 2, 4))
    grid = rng.standard_normal((5, 4)) * 0.3
    lap = line_laplacian(norm2, bases[0], dirs[0], grid)
    assert np.allclose(lap, 8 * norm2(dirs[0]), rtol=1e-5)
    rep = plurisubharmonic_check(norm2, bases, dirs, grid)
    assert rep.subharmonic and rep.strict
    lin = plurisubharmonic_check(lambda x: np.asarray(x)[..., 0, 0], bases, dirs, grid)
    assert lin.subharmonic and not lin.strict
    neg = plurisubharmonic_check(lambda x: -norm2(x), bases, dirs, grid)
    assert not neg.subharmonic
    assert "min_laplacian" in rep.to_csv()


def test_hull_membership():
    K = np.array([[[0.0, 0, 0, 0]], [[1.0, 0, 0, 0]], [[0.0, 1, 0, 0]]])
    assert in_convex_hull(K, np.array([0.3, 0.3, 0, 0]))
    assert not in_convex_hull(K, np.array([0.8, 0.8, 0, 0]))
    assert np.allclose(closest_hull_point(K, np.array([1.0, 1.0, 0, 0])), [0.5, 0.5, 0, 0], atol=1e-6)


def test_separating_exponential_examples(rng):
    g = rng.standard_normal((300, 4))
    ball = (g / np.linalg.norm(g, axis=-1, keepdims=True) * rng.random((300, 1)) ** 0.25)[:, None, :]
    f = separating_exponential(ball, hpoint(2 * E))
    assert abs(f.value_at_w - 1) <= 1e-12
    assert f.sup_K <= math.exp(-1) + 1e-12
    assert f.direction[0] > 0.99
    with pytest.raises(NoSeparation):
        separating_exponential(ball, ball[0])
    pair = np.array([[[-1.0, 0, 0, 0]], [[1.0, 0, 0, 0]]])
    f2 = separating_exponential(pair, hpoint(2 * K))
    assert np.allclose(f2.direction, [0, 0, 0, 1], atol=1e-6)
    assert math.isclose(f2.shift, 2.0, rel_tol=1e-6)


@given(st.integers(0, 10_000))
def test_exponential_modulus_closed_form(seed):
    rng = np.random.default_rng(seed)
    K = rng.standard_normal((6, 1, 4))
    w = hpoint(rng.standard_normal(4) * 4)
    try:
        f = separating_exponential(K, w)
    except NoSeparation:
        return
    x = rng.standard_normal((10, 1, 4))
    direct = np.linalg.norm(f(x), axis=-1)
    assert np.allclose(direct, f.modulus(x.reshape(10, 4)), rtol=1e-10)
    assert abs(f.value_at_w - 1) <= 1e-12 and f.sup_K < 1


def test_hull_estimate_examples():
    g = np.linspace(-1, 1, 5)
    grid = np.array(np.meshgrid(g, g, g, g, indexing="ij")).reshape(4, -1).T[:, None, :]
    origin = np.zeros((1, 1, 4))
    rep = hull_estimate(origin, grid)
    members = grid[rep.members].reshape(-1, 4)
    assert np.allclose(members, 0)
    assert rep.contained and rep.certificates_ok()
    vac = hull_estimate(origin, grid, family=[], separate=False)
    assert len(vac.members) == len(grid)
    assert '"members"' in rep.to_json()


@settings(max_examples=15)
@given(st.integers(0, 1000))
def test_hull_estimate_inside_convex_hull(seed):
    rng = np.random.default_rng(seed)
    K = rng.standard_normal((8, 1, 4))
    g = np.linspace(-1.5, 1.5, 4)
    grid = np.array(np.meshgrid(g, g, g, g, indexing="ij")).reshape(4, -1).T[:, None, :]
    rep = hull_estimate(K, grid)
    assert rep.contained and rep.certificates_ok()
