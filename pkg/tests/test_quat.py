import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quatrep.quat import (
    E, I, J, K, Quaternion, QuaternionDomainError, as_hpoint, as_real, channels, circle_path,
    delta_arg, from_channels, from_matrix, hpoint, PathSpec, pure_unit, qconj, qexp, qinv, qln,
    qmul, qnorm, scalar_product, to_matrix,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = arrays(np.float64, 4, elements=finite)


def test_basis_products():
    assert np.allclose(qmul(I, J), K)
    assert np.allclose(qmul(J, I), -K)
    assert np.allclose(qmul(J, K), I)
    assert np.allclose(qmul(K, I), J)
    for u in (I, J, K):
        assert np.allclose(qmul(u, u), -E)


def test_small_products():
    q = np.array([0.3, -1.0, 2.0, 0.5])
    assert np.allclose(qmul(E, q), q)
    assert np.allclose(qmul(E + I, E + J), [1, 1, 1, 1])


@given(quats, quats, quats)
def test_associative(a, b, c):
    lhs = qmul(qmul(a, b), c)
    rhs = qmul(a, qmul(b, c))
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


@given(quats, quats)
def test_norm_multiplicative_and_conj_antihomomorphic(a, b):
    assert math.isclose(qnorm(qmul(a, b)), qnorm(a) * qnorm(b), rel_tol=1e-12, abs_tol=1e-12)
    assert np.allclose(qconj(qmul(a, b)), qmul(qconj(b), qconj(a)), atol=1e-9)


@given(quats)
def test_inverse(a):
    if qnorm(a) < 1e-3:
        return
    assert np.allclose(qmul(a, qinv(a)), E, atol=1e-12)
    assert np.allclose(qmul(qinv(a), a), E, atol=1e-12)


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        qinv(np.zeros(4))


def test_field_axioms_batch(rng):
    a, b, c = rng.standard_normal((3, 1000, 4))
    assert np.abs(qmul(a, b + c) - qmul(a, b) - qmul(a, c)).max() < 1e-13
    assert np.abs(qmul(a + b, c) - qmul(a, c) - qmul(b, c)).max() < 1e-13
    assert np.abs(qmul(qmul(a, b), c) - qmul(a, qmul(b, c))).max() < 1e-13


def test_matrix_model(rng):
    a, b = rng.standard_normal((2, 1000, 4))
    assert np.abs(from_matrix(to_matrix(a)) - a).max() < 1e-15
    prod = to_matrix(a) @ to_matrix(b)
    assert np.abs(prod - to_matrix(qmul(a, b))).max() < 1e-13
    t, u = channels(a)
    assert np.allclose(from_channels(t, u), a)


def test_exp_and_log_examples():
    assert np.allclose(qexp(np.zeros(4)), E)
    # truncated power series oracle
    a = math.pi * J
    term, total = E.copy(), E.copy()
    for k in range(1, 60):
        term = qmul(term, a) / k
        total = total + term
    assert np.abs(qexp(a) - total).max() < 1e-12
    assert np.abs(qexp(a) + E).max() < 1e-12
    assert np.allclose(qln(2 * E), [math.log(2), 0, 0, 0])


def test_exp_modulus(rng):
    a = rng.standard_normal((1000, 4))
    assert np.abs(qnorm(qexp(a)) - np.exp(a[:, 0])).max() < 1e-12 * np.exp(np.abs(a[:, 0])).max()


@given(quats)
def test_exp_log_roundtrip(a):
    if qnorm(a) < 1e-6:
        return
    assert np.allclose(qexp(qln(a)), a, atol=1e-9 * (1 + qnorm(a)))


def test_log_of_zero():
    with pytest.raises(QuaternionDomainError):
        qln(np.zeros(4))


def test_quaternion_class():
    q = Quaternion(1, 2, 3, 4)
    assert (q * q.inverse()).isclose(Quaternion(1))
    assert (Quaternion(0, 1) * Quaternion(0, 0, 1)).isclose(Quaternion(0, 0, 0, 1))
    assert q.conj().isclose(Quaternion(1, -2, -3, -4))
    assert math.isclose(q.norm(), math.sqrt(30))
    assert (2 * q - q).isclose(q)
    assert q.exp().ln().isclose(q.exp().ln())


def test_scalar_product_examples(rng):
    assert np.allclose(scalar_product(hpoint(I), hpoint(I)), E)
    assert np.allclose(scalar_product(hpoint(I), hpoint(J)), -K)
    zeta, z = rng.standard_normal((2, 2, 4))
    # conjugate symmetry
    assert np.abs(scalar_product(zeta, z) - qconj(scalar_product(z, zeta))).max() < 1e-14
    with pytest.raises(ValueError):
        scalar_product(np.zeros((2, 4)), np.zeros((3, 4)))


def test_real_roundtrip(rng):
    z = rng.standard_normal((5, 3, 4))
    assert np.array_equal(as_hpoint(as_real(z), 3), z)
    with pytest.raises(ValueError):
        as_hpoint(np.zeros(7), 2)


def test_pure_unit():
    assert np.allclose(pure_unit(2 * I), I)
    with pytest.raises(ValueError):
        pure_unit(E)


@pytest.mark.parametrize("axis", [I, J, (I + J) / math.sqrt(2)])
@pytest.mark.parametrize("windings", [1, 2])
def test_delta_arg_circles(axis, windings):
    path = circle_path(np.array([0.3, -0.1, 0.2, 0.0]), 0.5, axis, windings)
    M, n = delta_arg(path)
    assert math.isclose(n, windings, abs_tol=1e-9)
    assert np.allclose(M, pure_unit(axis), atol=1e-9)


def test_delta_arg_constant_path_and_errors():
    path = PathSpec(gamma=lambda s: np.broadcast_to(np.array([1.0, 0, 0, 0]), np.shape(s) + (4,)), ref=np.zeros(4))
    _, n = delta_arg(path)
    assert n == 0
    through = circle_path(np.zeros(4), 1.0, I)
    bad = PathSpec(gamma=through.gamma, ref=np.array([1.0, 0, 0, 0]))
    with pytest.raises(QuaternionDomainError):
        delta_arg(bad)
