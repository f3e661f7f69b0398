import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_vector
from oracles import loop_mat_vec
from wilson_cg.su3 import (
    DegenerateMatrixError,
    adj_mat_vec,
    adjoint,
    compress,
    mat_vec,
    random_su3,
    reconstruct_third_row,
    su3_from_keys,
    unitarity_error,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def test_mat_vec_identity(rng):
    x = random_vector(rng)
    assert np.array_equal(mat_vec(np.eye(3), x), x)


def test_mat_vec_phase():
    out = mat_vec(1j * np.eye(3), np.array([1, 0, 0]))
    assert np.array_equal(out, [1j, 0, 0])


def test_mat_vec_against_loop(rng):
    for seed in range(50):
        U = random_su3(seed)
        x = random_vector(rng)
        assert np.max(np.abs(mat_vec(U, x) - loop_mat_vec(U, x))) <= 1e-15


def test_mat_vec_broadcasts(rng):
    U = su3_from_keys(np.arange(10, dtype=np.uint64))
    x = random_vector(rng, (10,))
    batched = mat_vec(U, x)
    for k in range(10):
        assert np.array_equal(batched[k], mat_vec(U[k], x[k]))


def test_adj_mat_vec_cases():
    x = np.array([1, 0, 0])
    assert np.array_equal(adj_mat_vec(np.eye(3), x), x)
    assert np.array_equal(adj_mat_vec(1j * np.eye(3), x), [-1j, 0, 0])


def test_adj_mat_vec_is_mat_vec_of_adjoint(rng):
    U = random_su3(5)
    x = random_vector(rng)
    assert np.array_equal(adj_mat_vec(U, x), mat_vec(adjoint(U), x))


def test_adjoint_round_trip(rng):
    for seed in range(20):
        U = random_su3(seed)
        x = random_vector(rng)
        assert np.max(np.abs(adj_mat_vec(U, mat_vec(U, x)) - x)) <= 1e-13


def test_reconstruct_identity():
    assert np.array_equal(reconstruct_third_row(np.eye(3)[:2]), np.eye(3))


def test_reconstruct_random_round_trip():
    for seed in range(100):
        U = random_su3(seed)
        assert np.max(np.abs(reconstruct_third_row(compress(U)) - U)) <= 1e-13


def test_reconstruct_degenerate():
    e0 = np.array([1, 0, 0], dtype=complex)
    with pytest.raises(DegenerateMatrixError):
        reconstruct_third_row(np.stack([e0, e0]))


def test_random_su3_unitary_and_deterministic():
    U = random_su3(42)
    assert unitarity_error(U) <= 1e-12
    assert np.array_equal(random_su3(42), U)
    assert not np.array_equal(random_su3(43), U)


def test_random_su3_determinant_1000_seeds():
    U = np.stack([random_su3(s) for s in range(1000)])
    assert np.max(np.abs(np.linalg.det(U) - 1)) <= 1e-12
    assert unitarity_error(U) <= 1e-12


@given(seeds)
@settings(max_examples=200, deadline=None)
def test_norm_preserved(seed):
    U = random_su3(seed)
    x = random_vector(np.random.default_rng(seed % 2**32))
    assert abs(np.linalg.norm(mat_vec(U, x)) - np.linalg.norm(x)) <= 1e-13


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_double_adjoint_exact(seed):
    U = random_su3(seed)
    assert np.array_equal(adjoint(adjoint(U)), U)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_compress_reconstruct_identity(seed):
    U = random_su3(seed)
    assert np.max(np.abs(reconstruct_third_row(compress(U)) - U)) <= 1e-13


@given(seeds, st.complex_numbers(max_magnitude=1), st.complex_numbers(max_magnitude=1))
@settings(max_examples=100, deadline=None)
def test_mat_vec_linear(seed, a, b):
    r = np.random.default_rng(seed % 2**32)
    U = random_su3(seed)
    x, y = random_vector(r), random_vector(r)
    lhs = mat_vec(U, a * x + b * y)
    rhs = a * mat_vec(U, x) + b * mat_vec(U, y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13
