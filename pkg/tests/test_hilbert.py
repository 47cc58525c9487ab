import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quantum_frenet.exceptions import (
    DegenerateDispersionError,
    DimensionMismatchError,
    ImaginaryResidueError,
    InvalidInputError,
    NonHermitianError,
    NotNormalizedError,
)
from quantum_frenet.hilbert import (
    anticommutator,
    as_real,
    central_moments,
    check_hermitian,
    check_normalized,
    commutator,
    covariance,
    expectation,
    expectation_complex,
    generalized_variance,
    i_times,
    inner,
    pauli_matrices,
    random_hermitian,
    random_state,
    spin_matrices,
    variance,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dimensions = st.sampled_from([2, 3, 4])


def _draw(seed, n):
    rng = np.random.default_rng(seed)
    return random_hermitian(rng, n), random_hermitian(rng, n), random_state(rng, n)


def test_pauli_algebra():
    sx, sy, sz = pauli_matrices()
    np.testing.assert_allclose(sx @ sy, 1j * sz, atol=1e-15)
    np.testing.assert_allclose(commutator(sx, sy), 2j * sz, atol=1e-15)
    np.testing.assert_allclose(anticommutator(sx, sx), 2 * np.eye(2), atol=1e-15)


@pytest.mark.parametrize("j", [0.5, 1, 1.5])
def test_spin_matrices_commutation(j):
    jx, jy, jz = spin_matrices(j)
    np.testing.assert_allclose(commutator(jx, jy), 1j * jz, atol=1e-13)
    casimir = jx @ jx + jy @ jy + jz @ jz
    np.testing.assert_allclose(casimir, j * (j + 1) * np.eye(int(2 * j + 1)), atol=1e-13)


def test_spin_matrices_reject_non_half_integer():
    with pytest.raises(DimensionMismatchError):
        spin_matrices(0.3)


def test_pauli_expectations_of_basis_state():
    sx, sy, sz = pauli_matrices()
    up = np.array([1.0, 0.0], dtype=complex)
    assert expectation(sz, up) == pytest.approx(1.0)
    assert expectation(sx, up) == pytest.approx(0.0)
    assert variance(sx, up) == pytest.approx(1.0)


def test_check_hermitian_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_check_hermitian_tolerance_grows_with_large_entries():
    # Tolerance is 1e-10 absolute up to unit entries, relative to the largest entry beyond
    large = np.array([[1e6, 1e6], [1e6 + 1e-5, -1e6]], dtype=complex)
    np.testing.assert_allclose(check_hermitian(large), check_hermitian(large).conj().T)
    small = np.array([[1e-3, 0.0], [5e-11, 1e-3]], dtype=complex)
    check_hermitian(small)
    with pytest.raises(NonHermitianError):
        check_hermitian(np.array([[1.0, 0.5], [0.5 + 1e-9, -1.0]], dtype=complex))
    with pytest.raises(NonHermitianError):
        check_hermitian(np.array([[1e6, 1e6], [1e6 + 1e-3, -1e6]], dtype=complex))


def test_check_hermitian_returns_hermitian_part():
    op = np.array([[1.0, 1.0 + 1e-13], [1.0, -1.0]], dtype=complex)
    sym = check_hermitian(op)
    np.testing.assert_array_equal(sym, sym.conj().T)


def test_check_normalized():
    with pytest.raises(NotNormalizedError):
        check_normalized(np.array([1.0, 1.0]))
    with pytest.raises(DimensionMismatchError):
        check_normalized(np.array([1.0]))


def test_dimension_mismatch():
    sx, _, _ = pauli_matrices()
    with pytest.raises(DimensionMismatchError):
        expectation(sx, np.ones(3) / math.sqrt(3))


def test_as_real_and_i_times():
    assert as_real(2.0 + 1e-14j) == 2.0
    with pytest.raises(ImaginaryResidueError):
        as_real(2.0 + 1e-6j)
    assert i_times(-3j) == 3.0
    with pytest.raises(ImaginaryResidueError):
        i_times(1e-3 - 3j)


@given(seeds, dimensions)
def test_expectation_is_real(seed, n):
    h, _, psi = _draw(seed, n)
    value = expectation_complex(h, psi)
    assert abs(value.imag) <= 1e-12 * max(1.0, np.linalg.norm(h))


@given(seeds, dimensions)
def test_commutator_expectation_is_imaginary(seed, n):
    h, hdot, psi = _draw(seed, n)
    value = expectation_complex(commutator(h, hdot), psi)
    assert abs(value.real) <= 1e-12 * max(1.0, np.linalg.norm(h) * np.linalg.norm(hdot))


@given(seeds, dimensions)
def test_covariance_symmetric_part(seed, n):
    h, hdot, psi = _draw(seed, n)
    symmetric = expectation(anticommutator(h, hdot), psi) / 2 - expectation(h, psi) * expectation(hdot, psi)
    assert covariance(h, hdot, psi).real == pytest.approx(symmetric, abs=1e-10)


@given(seeds, dimensions)
def test_moment_inequality(seed, n):
    h, _, psi = _draw(seed, n)
    moments = central_moments(h, psi)
    assert moments.m2 > 0
    assert moments.kurtosis >= 1 + moments.skewness ** 2 - 1e-10


@given(seeds, dimensions)
def test_generalized_variance_matches_matrix_determinant(seed, n):
    h, hdot, psi = _draw(seed, n)
    sigma = generalized_variance(h, hdot, psi)
    assert sigma.determinant >= 0
    direct = np.linalg.det(sigma.matrix).real
    assert sigma.determinant == pytest.approx(direct, abs=1e-9 * max(1.0, sigma.hh * sigma.hdothdot))


def test_generalized_variance_vanishes_for_proportional_operators(rng):
    h = random_hermitian(rng, 3)
    psi = random_state(rng, 3)
    assert generalized_variance(h, 2.5 * h, psi).determinant == pytest.approx(0.0, abs=1e-12)


def test_central_moments_of_eigenstate():
    _, _, sz = pauli_matrices()
    with pytest.raises(DegenerateDispersionError):
        central_moments(sz, np.array([1.0, 0.0], dtype=complex))


def test_central_moments_rejects_bad_order(rng):
    with pytest.raises(InvalidInputError):
        central_moments(random_hermitian(rng, 2), random_state(rng, 2), up_to=5)


def test_central_moments_of_qubit_equatorial_state():
    # ⟨σx⟩ = 0 on |0⟩ + i|1⟩, and σx² = I gives m2 = m4 = 1
    sx, _, _ = pauli_matrices()
    psi = np.array([1.0, 1j]) / math.sqrt(2)
    moments = central_moments(sx, psi)
    assert moments.mean == pytest.approx(0.0, abs=1e-15)
    assert moments.skewness == pytest.approx(0.0, abs=1e-15)
    assert moments.kurtosis == pytest.approx(1.0)


def test_stacks_broadcast(rng):
    hs = random_hermitian(rng, 3, size=5)
    states = random_state(rng, 3, size=5)
    stacked = expectation(hs, states)
    assert stacked.shape == (5,)
    for i in range(5):
        assert stacked[i] == pytest.approx(expectation(hs[i], states[i]))
    assert np.allclose(inner(states, states), 1.0)
