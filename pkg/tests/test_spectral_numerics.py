import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsbvp import numerics
from gsbvp.errors import DomainError, NotHermitian, ShapeMismatch
from gsbvp.spectral import (
    MAX_ORDER,
    as_cmatrix,
    herm_eig,
    is_positive_definite,
    matfun,
    min_eigenvalue,
    range_basis,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def test_herm_eig_reconstructs():
    rng = np.random.default_rng(0)
    h = random_hermitian(rng, 6)
    eig = herm_eig(h)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    assert np.allclose(eig.reconstruct(), h, atol=1e-12)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[0, 1], [0, 0]]))


def test_matrix_shape_guards():
    with pytest.raises(ShapeMismatch):
        as_cmatrix(np.zeros((2, 3)))
    with pytest.raises(ShapeMismatch):
        as_cmatrix(np.eye(MAX_ORDER + 1))
    with pytest.raises(ShapeMismatch):
        as_cmatrix(np.array([[np.nan]]))


def test_matfun_inverse_sqrt_and_domain():
    h = np.diag([4.0, 9.0])
    assert np.allclose(matfun(h, lambda x: x ** -0.5), np.diag([0.5, 1 / 3]))
    with pytest.raises(DomainError):
        matfun(np.diag([-1.0, 1.0]), np.sqrt)


def test_matfun_on_stack():
    rng = np.random.default_rng(1)
    stack = np.array([random_hermitian(rng, 3) for _ in range(4)])
    ex = matfun(stack, np.exp)
    for h, e in zip(stack, ex):
        w, v = np.linalg.eigh(h)
        assert np.allclose(e, v @ np.diag(np.exp(w)) @ v.conj().T)


def test_positive_definite_and_min_eig():
    assert is_positive_definite(np.eye(3))
    assert not is_positive_definite(np.diag([1.0, 0.0]))
    assert min_eigenvalue(np.diag([3.0, -2.0])) == pytest.approx(-2.0)


def test_range_basis_of_projector():
    p = np.diag([1.0, 0.0, 1.0])
    b = range_basis(p)
    assert b.shape == (3, 2)
    assert np.allclose(b @ b.conj().T, p)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10_000))
def test_matfun_square_matches_matrix_square(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    assert np.allclose(matfun(h, lambda x: x * x), h @ h, atol=1e-10)


# ---------------------------------------------------------------- numerics

@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50), st.randoms())
def test_exact_sum_is_order_independent(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a = numerics.exact_sum(np.array(values))
    b = numerics.exact_sum(np.array(shuffled))
    assert a == b
    assert a == math.fsum(values)


def test_exact_sum_weighted_complex_matrices():
    rng = np.random.default_rng(2)
    v = rng.normal(size=(7, 2, 2)) + 1j * rng.normal(size=(7, 2, 2))
    w = rng.random(7)
    assert np.allclose(numerics.exact_sum(v, w), np.tensordot(w, v, axes=1))


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_hermite_rule_moments(dim):
    x, w = numerics.hermite_product_rule(dim, 10)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-13)
    # <y_1^2> = 1/2 under exp(-|y|^2)/pi^(dim/2)
    assert math.isclose(np.sum(w * x[:, 0] ** 2), 0.5, rel_tol=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_sphere_rule_moments(dim):
    x, w = numerics.sphere_rule(dim, 12)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-13)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
    # uniform measure: <theta_i theta_j> = delta_ij / dim, <theta_1^4> = 3 / (dim (dim + 2))
    second = np.einsum("k,ki,kj->ij", w, x, x)
    assert np.allclose(second, np.eye(dim) / dim, atol=1e-13)
    assert math.isclose(np.sum(w * x[:, 0] ** 4), 3 / (dim * (dim + 2)), rel_tol=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_direction_samples_symmetric_unit(dim):
    d = numerics.direction_samples(dim, 40)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    # closed under negation
    for v in d[:10]:
        assert np.min(np.linalg.norm(d + v, axis=1)) < 1e-12


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(numerics.THREADS_ENV, "3")
    assert numerics.worker_count() == 3
    monkeypatch.setenv(numerics.THREADS_ENV, "junk")
    assert numerics.worker_count() == 1
    monkeypatch.setenv(numerics.THREADS_ENV, "8")
    assert numerics.pmap(lambda x: x * x, range(20)) == [x * x for x in range(20)]
