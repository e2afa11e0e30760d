import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatrep.jacobi import (
    JacobiMatrix, RankDeficiencyError, SeriesDivergence, chain_check, is_regular, jacobi_real,
    local_inverse, rank_r,
)
from quatrep.quat import E, I, J, K, qmul

BASIS = (E, I, J, K)


def lr_matrix(a, b):
    """Real matrix of x -> a x b, column p = a e_p b."""
    return np.stack([qmul(qmul(a, e), b) for e in BASIS], axis=-1)


def first(x):
    return np.asarray(x)[..., 0, :]


def test_identity_and_linear_maps(rng):
    z = rng.standard_normal((1, 4))
    assert np.allclose(jacobi_real(lambda x: x, z).real, np.eye(4), atol=1e-10)
    a, b = rng.standard_normal((2, 4))
    Jm = jacobi_real(lambda x: qmul(qmul(a, first(x)), b)[..., None, :], z)
    assert np.allclose(Jm.real, lr_matrix(a, b), atol=1e-9)
    assert rank_r(Jm) == 4 and is_regular(Jm)


def test_rank_examples(rng):
    z = rng.standard_normal((1, 4))
    proj = lambda x: ((first(x) - qmul(qmul(I, first(x)), I)) / 2)[..., None, :]
    Jp = jacobi_real(proj, z)
    assert rank_r(Jp) == 2
    assert np.allclose(Jp.real, np.diag([1, 1, 0, 0]), atol=1e-10)
    assert rank_r(jacobi_real(lambda x: 0 * x, z)) == 0
    z2 = rng.standard_normal((2, 4))
    assert rank_r(jacobi_real(lambda x: x, z2)) == 8


@given(st.integers(0, 10_000))
def test_rank_invariant_under_unit_multiplication(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4))
    A[:, 3] = A[:, 0] + A[:, 1]
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    assert rank_r(A) == rank_r(lr_matrix(q, E) @ A) == rank_r(A @ lr_matrix(E, q)) == 3


def test_chain_rule_examples(rng):
    z = rng.standard_normal((1, 4))
    a, b, c, d = rng.standard_normal((4, 4))
    f = lambda x: qmul(qmul(a, first(x)), b)[..., None, :]
    g = lambda x: qmul(qmul(c, first(x)), d)[..., None, :]
    # central differences are exact on linear maps; a wide step keeps roundoff small
    assert chain_check(f, g, z, h=1e-2) <= 1e-10
    assert chain_check(f, lambda x: x, z) <= 1e-8
    assert chain_check(lambda x: qmul(qmul(I, first(x)), J)[..., None, :], lambda x: qmul(K, first(x))[..., None, :], z) <= 1e-8
    nl = lambda x: (first(x) + 0.1 * qmul(first(x), qmul(I, first(x))))[..., None, :]
    assert chain_check(nl, nl, z) <= 1e-8


def test_composition_and_blocks(rng):
    A = JacobiMatrix(rng.standard_normal((8, 4)), 2, 1)
    B = JacobiMatrix(rng.standard_normal((4, 8)), 1, 2)
    assert (A @ B).real.shape == (8, 8)
    assert A.block(1, 0).shape == (4, 4)
    assert A.apply(np.ones((1, 4))).shape == (2, 4)
    with pytest.raises(ValueError):
        A @ A


def test_local_inverse():
    f = lambda x: (first(x) + 0.05 * qmul(qmul(first(x), I), first(x)))[..., None, :]
    z = np.zeros((1, 4))
    inv = local_inverse(f, z, radius=0.5, k_max=30)
    assert inv.certificate <= 1e-6
    # certificate non-increasing until the tolerance floor
    h = np.array(inv.history)
    floor = 1e-13
    assert np.all((np.diff(h) <= 0) | (h[1:] < floor))
    y = np.array([[0.2, -0.1, 0.15, 0.05]])
    assert np.abs(f(inv(y)) - y).max() < 1e-6
    ident = local_inverse(lambda x: x, z)
    assert ident.certificate <= 1e-12


def test_local_inverse_rejects_rank_deficiency():
    proj = lambda x: ((first(x) - qmul(qmul(I, first(x)), I)) / 2)[..., None, :]
    with pytest.raises(RankDeficiencyError):
        local_inverse(proj, np.zeros((1, 4)))


def test_local_inverse_divergence():
    f = lambda x: (first(x) + 2.0 * qmul(first(x), first(x)))[..., None, :]
    with pytest.raises(SeriesDivergence):
        local_inverse(f, np.zeros((1, 4)), radius=2.0, k_max=5)
