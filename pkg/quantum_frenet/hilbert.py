"""
Dense complex linear algebra and the statistical layer built on it.

Operators are numpy arrays of shape ``(..., N, N)`` and states are arrays of
shape ``(..., N)``. Every function broadcasts over the leading axes, so a
whole trajectory (a stack of Hamiltonians and a stack of states) can be
processed in one call.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .exceptions import (
    DegenerateDispersionError,
    DimensionMismatchError,
    ImaginaryResidueError,
    InvalidInputError,
    NonHermitianError,
    NotNormalizedError,
)

logger = logging.getLogger(__name__)

HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-10
IMAG_TOL = 1e-12
DISPERSION_EPS = 1e-14

Real = Union[float, np.ndarray]
Complex = Union[complex, np.ndarray]


def pauli_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (σ_x, σ_y, σ_z) as complex 2×2 arrays."""
    sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
    sigma_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sigma_z = np.array([[1, 0], [0, -1]], dtype=complex)
    return sigma_x, sigma_y, sigma_z


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Return (J_x, J_y, J_z) for spin ``j`` in the |j, m⟩ basis ordered m = j, ..., -j.

    Args:
        j: Spin quantum number (a positive multiple of 1/2)

    Returns:
        Three complex (2j+1)×(2j+1) arrays
    """
    dim = int(round(2 * j)) + 1
    if dim < 2 or not np.isclose(2 * j + 1, dim):
        raise DimensionMismatchError(f"Spin must be a positive multiple of 1/2, got {j}")
    m = j - np.arange(dim)
    raising = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        raising[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    lowering = raising.conj().T
    j_x = (raising + lowering) / 2
    j_y = (raising - lowering) / 2j
    j_z = np.diag(m).astype(complex)
    return j_x, j_y, j_z


def frobenius_norm(op: np.ndarray) -> Real:
    """Frobenius norm over the last two axes."""
    return np.linalg.norm(op, axis=(-2, -1))


def dagger(op: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(op, -1, -2))


def identity_like(op: np.ndarray) -> np.ndarray:
    """Identity matrix matching the trailing dimension of ``op``."""
    return np.eye(op.shape[-1], dtype=complex)


def _check_square(op: np.ndarray, what: str = "operator") -> None:
    if op.ndim < 2 or op.shape[-1] != op.shape[-2]:
        raise DimensionMismatchError(f"{what} must be square, got shape {op.shape}")


def _check_pair(op: np.ndarray, state: np.ndarray) -> None:
    _check_square(op)
    if state.ndim < 1 or state.shape[-1] != op.shape[-1]:
        raise DimensionMismatchError(
            f"Operator of dimension {op.shape[-1]} cannot act on a state of shape {state.shape}"
        )
    try:
        np.broadcast_shapes(op.shape[:-2], state.shape[:-1])
    except ValueError as e:
        raise DimensionMismatchError(
            f"Operator stack {op.shape} and state stack {state.shape} do not broadcast: {e}"
        )


def _check_same_dimension(a: np.ndarray, b: np.ndarray) -> None:
    _check_square(a)
    _check_square(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"Operators have different dimensions: {a.shape[-1]} and {b.shape[-1]}"
        )


def _scalar(value):
    """Unwrap 0-d arrays so single-point calls return plain Python numbers."""
    if np.ndim(value) == 0:
        value = value.item() if isinstance(value, np.ndarray) else value
        return complex(value) if np.iscomplexobj(value) else float(value)
    return value


def hermiticity_residue(op: np.ndarray) -> Real:
    """Largest entrywise deviation of ``op`` from its conjugate transpose."""
    op = np.asarray(op, dtype=complex)
    _check_square(op)
    return np.max(np.abs(op - dagger(op)), axis=(-2, -1))


def check_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """
    Validate Hermiticity and return the exactly Hermitian part of ``op``.

    Raises:
        NonHermitianError: If any entry deviates by more than ``tol`` (scaled by the
            largest entry when that exceeds one)
    """
    op = np.asarray(op, dtype=complex)
    residue = hermiticity_residue(op)
    scale = np.maximum(1.0, np.max(np.abs(op), axis=(-2, -1)))
    if np.any(residue > tol * scale):
        raise NonHermitianError(
            f"Operator is not Hermitian: residue {np.max(residue):.3e} exceeds {tol:.1e}"
        )
    return (op + dagger(op)) / 2


def check_normalized(state: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    """
    Validate that every state in the stack has unit norm and return it renormalized.

    Raises:
        NotNormalizedError: If a norm deviates from one by more than ``tol``
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim < 1 or state.shape[-1] < 2:
        raise DimensionMismatchError(f"A state needs dimension N >= 2, got shape {state.shape}")
    norms = np.linalg.norm(state, axis=-1)
    if not np.all(np.isfinite(norms)) or np.any(np.abs(norms - 1.0) > tol):
        raise NotNormalizedError(
            f"State is not normalized: |norm - 1| = {np.max(np.abs(norms - 1.0)):.3e}"
        )
    return state / norms[..., None]


def normalize(state: np.ndarray) -> np.ndarray:
    """Return ``state`` divided by its norm."""
    state = np.asarray(state, dtype=complex)
    norms = np.linalg.norm(state, axis=-1)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0):
        raise NotNormalizedError("Cannot normalize a zero or non-finite state vector")
    return state / norms[..., None]


def apply(op: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Matrix-vector product op|state⟩ over stacks."""
    return np.einsum("...ij,...j->...i", op, state)


def inner(bra: np.ndarray, ket: np.ndarray) -> Complex:
    """Inner product ⟨bra|ket⟩ over stacks."""
    return _scalar(np.einsum("...i,...i->...", np.conj(bra), ket))


def as_real(value: Complex, scale: Real = 1.0, what: str = "value", tol: float = IMAG_TOL) -> Real:
    """
    Discard the imaginary part of a quantity that must be real.

    Raises:
        ImaginaryResidueError: If |Im value| exceeds ``tol`` * max(1, ``scale``)
    """
    value = np.asarray(value)
    bound = tol * np.maximum(1.0, scale)
    if np.any(np.abs(value.imag) > bound):
        raise ImaginaryResidueError(
            f"{what} should be real but carries an imaginary part of "
            f"{np.max(np.abs(value.imag)):.3e}"
        )
    return _scalar(np.real(value).astype(float))


def i_times(value: Complex, scale: Real = 1.0, what: str = "value", tol: float = IMAG_TOL) -> Real:
    """
    Return i·value for a purely imaginary ``value`` as a real number, i.e. -Im(value).

    Raises:
        ImaginaryResidueError: If |Re value| exceeds ``tol`` * max(1, ``scale``)
    """
    value = np.asarray(value)
    bound = tol * np.maximum(1.0, scale)
    if np.any(np.abs(value.real) > bound):
        raise ImaginaryResidueError(
            f"{what} should be purely imaginary but carries a real part of "
            f"{np.max(np.abs(value.real)):.3e}"
        )
    return _scalar(-np.imag(value).astype(float))


def expectation_complex(op: np.ndarray, state: np.ndarray) -> Complex:
    """⟨state|op|state⟩ for a general square matrix."""
    op = np.asarray(op, dtype=complex)
    state = np.asarray(state, dtype=complex)
    _check_pair(op, state)
    return _scalar(np.einsum("...i,...ij,...j->...", np.conj(state), op, state))


def expectation(op: np.ndarray, state: np.ndarray) -> Real:
    """
    ⟨state|op|state⟩ for a Hermitian operator.

    Args:
        op: Hermitian operator (stack)
        state: Normalized state (stack)

    Returns:
        The real expectation value

    Raises:
        DimensionMismatchError: If shapes are incompatible
        NonHermitianError: If ``op`` is not Hermitian
    """
    op = np.asarray(op, dtype=complex)
    _check_pair(op, np.asarray(state))
    hermitian = check_hermitian(op)
    value = expectation_complex(hermitian, state)
    return as_real(value, scale=frobenius_norm(hermitian), what="Expectation value")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """AB - BA."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_same_dimension(a, b)
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """AB + BA."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_same_dimension(a, b)
    return a @ b + b @ a


def delta_operator(op: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Δop = op - ⟨op⟩·I with respect to ``state``."""
    op = np.asarray(op, dtype=complex)
    mean = np.asarray(expectation(op, state))
    return op - mean[..., None, None] * identity_like(op)


def variance(op: np.ndarray, state: np.ndarray) -> Real:
    """⟨(Δop)²⟩, evaluated as ‖Δop|state⟩‖² so that it is never negative."""
    shifted = apply(delta_operator(op, state), np.asarray(state, dtype=complex))
    return _scalar(np.sum(np.abs(shifted) ** 2, axis=-1))


def covariance(a: np.ndarray, b: np.ndarray, state: np.ndarray) -> Complex:
    """cov(A, B) = ⟨AB⟩ - ⟨A⟩⟨B⟩ for general (not necessarily Hermitian) A, B."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_same_dimension(a, b)
    product = expectation_complex(a @ b, state)
    return _scalar(np.asarray(product) - np.asarray(expectation_complex(a, state))
                   * np.asarray(expectation_complex(b, state)))


@dataclass(frozen=True)
class MomentSet:
    """Mean and central moments of an observable in a pure state."""
    mean: Real
    m2: Real
    m3: Optional[Real] = None
    m4: Optional[Real] = None
    skewness: Optional[Real] = None
    kurtosis: Optional[Real] = None


def central_moments(op: np.ndarray, state: np.ndarray, up_to: int = 4) -> MomentSet:
    """
    Central moments m_k = ⟨(Δop)^k⟩ for k = 2..up_to with skewness and kurtosis.

    Args:
        op: Hermitian operator (stack)
        state: Normalized state (stack)
        up_to: Highest moment to compute (2, 3 or 4)

    Returns:
        MomentSet; skewness needs up_to >= 3 and kurtosis up_to >= 4

    Raises:
        DegenerateDispersionError: If m₂ <= 1e-14·‖op‖²_F (state is an eigenstate)
    """
    if up_to not in (2, 3, 4):
        raise InvalidInputError(f"up_to must be 2, 3 or 4, got {up_to}")
    op = check_hermitian(op)
    state = np.asarray(state, dtype=complex)
    _check_pair(op, state)
    mean = np.asarray(expectation(op, state))
    shifted_op = op - mean[..., None, None] * identity_like(op)
    first = apply(shifted_op, state)
    m2 = np.sum(np.abs(first) ** 2, axis=-1)
    threshold = DISPERSION_EPS * frobenius_norm(op) ** 2
    if np.any(m2 <= threshold):
        raise DegenerateDispersionError(
            "State is an eigenstate of the operator: the dispersion vanishes "
            f"(m2 = {np.min(m2):.3e})"
        )
    m3 = m4 = skewness = kurtosis = None
    if up_to >= 3:
        second = apply(shifted_op, first)
        m3 = np.real(np.einsum("...i,...i->...", np.conj(first), second))
        skewness = m3 / m2 ** 1.5
        if up_to == 4:
            m4 = np.sum(np.abs(second) ** 2, axis=-1)
            kurtosis = m4 / m2 ** 2
    unwrap = lambda x: None if x is None else _scalar(x)  # noqa: E731
    return MomentSet(
        mean=_scalar(mean), m2=_scalar(m2), m3=unwrap(m3), m4=unwrap(m4),
        skewness=unwrap(skewness), kurtosis=unwrap(kurtosis),
    )


@dataclass(frozen=True)
class CovarianceMatrix2:
    """Covariance matrix Σ(H, Ḣ) of a Hamiltonian and its time derivative."""
    hh: Real
    hhdot: Complex
    hdoth: Complex
    hdothdot: Real
    determinant: Real

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.hh, self.hhdot], [self.hdoth, self.hdothdot]], dtype=complex)


def generalized_variance(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> CovarianceMatrix2:
    """
    Covariance matrix of (H, Ḣ) and its determinant, the generalized variance.

    With x = ΔH|ψ⟩ and y = ΔḢ|ψ⟩ the entries are ⟨x|x⟩, ⟨x|y⟩, ⟨y|x⟩, ⟨y|y⟩; the
    determinant is accumulated as ½ Σ_ij |x_i y_j - x_j y_i|², which equals
    ‖x‖²‖y‖² - |⟨x|y⟩|² and is non-negative by construction.
    """
    h = check_hermitian(h)
    hdot = check_hermitian(hdot)
    _check_same_dimension(h, hdot)
    state = np.asarray(state, dtype=complex)
    x = apply(delta_operator(h, state), state)
    y = apply(delta_operator(hdot, state), state)
    hh = np.sum(np.abs(x) ** 2, axis=-1)
    hdothdot = np.sum(np.abs(y) ** 2, axis=-1)
    hhdot = np.einsum("...i,...i->...", np.conj(x), y)
    wedge = x[..., :, None] * y[..., None, :] - y[..., :, None] * x[..., None, :]
    determinant = 0.5 * np.sum(np.abs(wedge) ** 2, axis=(-2, -1))
    return CovarianceMatrix2(
        hh=_scalar(hh), hhdot=_scalar(hhdot), hdoth=_scalar(np.conj(hhdot)),
        hdothdot=_scalar(hdothdot), determinant=_scalar(determinant),
    )


def random_state(rng: np.random.Generator, n: int, size: Optional[int] = None) -> np.ndarray:
    """Haar-random pure state(s) of dimension ``n``."""
    shape = (n,) if size is None else (size, n)
    raw = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return normalize(raw)


def random_hermitian(rng: np.random.Generator, n: int, size: Optional[int] = None,
                     scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix (matrices) drawn from the Gaussian unitary ensemble."""
    shape = (n, n) if size is None else (size, n, n)
    raw = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return scale * (raw + dagger(raw)) / 2
