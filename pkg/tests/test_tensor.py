import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import block_diag, expm

from iontop.errors import DimensionError, NumericError
from iontop.spin import SpinRegister, collective_operator
from iontop.tensor import (distance_up_to_global_phase, is_unitary, matrix_exponential,
                           tensor_product, unitarity_error)

from conftest import random_antihermitian, wigner_small_d


def test_exp_zero_is_identity():
    np.testing.assert_array_equal(matrix_exponential(np.zeros((4, 4))), np.eye(4))


def test_exp_planar_rotation():
    t = math.pi / 2
    u = matrix_exponential(np.array([[0, -t], [t, 0]]))
    np.testing.assert_allclose(u, [[0, -1], [1, 0]], atol=1e-15)


def test_exp_spin_one_rotation_matches_wigner_d():
    jy = collective_operator(SpinRegister(2), "y")
    u = matrix_exponential(-1j * math.pi / 2 * jy)
    # standard convention: d^1_{0,-1}(beta) = -sin(beta)/sqrt(2)
    np.testing.assert_allclose(u[:, 0], [0.5, -1 / math.sqrt(2), 0.5], atol=1e-14)
    np.testing.assert_allclose(u, wigner_small_d(1, math.pi / 2), atol=1e-14)


@pytest.mark.parametrize("j", [0.5, 1.5, 3, 5.5])
@pytest.mark.parametrize("beta", [0.3, 1.9, 3.0])
def test_exp_rotation_against_wigner_d(j, beta):
    jy = collective_operator(SpinRegister.from_j(j), "y")
    np.testing.assert_allclose(matrix_exponential(-1j * beta * jy), wigner_small_d(j, beta),
                               atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_exp_matches_reference_on_general_matrices(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    ref = expm(g)
    np.testing.assert_allclose(matrix_exponential(g), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_exp_large_norm_scaled():
    jz = collective_operator(SpinRegister(80), "z")
    jy = collective_operator(SpinRegister(80), "y")
    g = -1j * (0.07 * jz @ jz + 1.3 * jy)
    u = matrix_exponential(g)
    assert unitarity_error(u) < 1e-10
    np.testing.assert_allclose(u, expm(g), atol=1e-11)


def test_exp_diagonal_shortcut():
    d = np.diag([0.1j, -2.0j, 0.5])
    np.testing.assert_allclose(matrix_exponential(d), np.diag(np.exp([0.1j, -2.0j, 0.5])))


def test_exp_errors():
    with pytest.raises(DimensionError):
        matrix_exponential(np.zeros((2, 3)))
    with pytest.raises(NumericError):
        matrix_exponential(np.array([[np.nan, 0], [0, 0]]))
    with pytest.raises(DimensionError):
        matrix_exponential(np.zeros((5001, 1)).reshape(5001, 1) @ np.zeros((1, 5001)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 64), scale=st.floats(0.01, 5.0))
def test_exp_inverse_pair_antihermitian(seed, n, scale):
    g = random_antihermitian(np.random.default_rng(seed), n, scale)
    u = matrix_exponential(g)
    assert is_unitary(u, 1e-10)
    assert np.abs(u @ matrix_exponential(-g) - np.eye(n)).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n1=st.integers(1, 8), n2=st.integers(1, 8))
def test_exp_block_diagonal(seed, n1, n2):
    rng = np.random.default_rng(seed)
    a = random_antihermitian(rng, n1)
    b = random_antihermitian(rng, n2)
    np.testing.assert_allclose(matrix_exponential(block_diag(a, b)),
                               block_diag(matrix_exponential(a), matrix_exponential(b)),
                               atol=1e-12)


def test_tensor_identities():
    np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(3)), np.eye(6))
    a = np.arange(6).reshape(2, 3) + 1j
    np.testing.assert_array_equal(tensor_product(a, np.eye(1)), a)
    out = tensor_product(np.diag([0.5, -0.5]), np.diag([1, 2]))
    np.testing.assert_array_equal(out, np.diag([0.5, 1, -0.5, -1]))


def test_tensor_index_convention():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 3))
    b = rng.normal(size=(4, 5))
    out = tensor_product(a, b)
    for i, j, k, l in [(1, 2, 3, 4), (0, 1, 2, 0), (1, 0, 0, 3)]:
        assert out[i * 4 + k, j * 5 + l] == a[i, j] * b[k, l]


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    # small integers keep every product exact
    a, b, c = (rng.integers(-9, 10, size=rng.integers(1, 4, size=2)) + 1j * rng.integers(-9, 10)
               for _ in range(3))
    np.testing.assert_array_equal(tensor_product(tensor_product(a, b), c),
                                  tensor_product(a, tensor_product(b, c)))


def test_distance_examples():
    u = matrix_exponential(random_antihermitian(np.random.default_rng(0), 5))
    assert distance_up_to_global_phase(u, u) < 1e-14
    assert distance_up_to_global_phase(u, np.exp(1j * math.pi / 4) * u) < 1e-14
    assert distance_up_to_global_phase(np.eye(2), np.diag([1, -1])) == pytest.approx(2.0)


def test_distance_matches_trace_formula():
    rng = np.random.default_rng(11)
    u = matrix_exponential(random_antihermitian(rng, 6))
    v = matrix_exponential(random_antihermitian(rng, 6))
    d = u.shape[0]
    expected = math.sqrt(max(0.0, 2 * d - 2 * abs(np.trace(u.conj().T @ v))))
    assert distance_up_to_global_phase(u, v) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), phase=st.floats(-10, 10))
def test_distance_symmetric_and_phase_blind(seed, phase):
    rng = np.random.default_rng(seed)
    u = matrix_exponential(random_antihermitian(rng, 4))
    v = matrix_exponential(random_antihermitian(rng, 4))
    assert distance_up_to_global_phase(u, v) == pytest.approx(distance_up_to_global_phase(v, u))
    assert distance_up_to_global_phase(u, np.exp(1j * phase) * u) < 1e-13


def test_distance_shape_mismatch():
    with pytest.raises(DimensionError):
        distance_up_to_global_phase(np.eye(2), np.eye(3))
