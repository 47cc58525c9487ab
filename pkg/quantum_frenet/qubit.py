"""
Two-level systems in Bloch-vector form.

A qubit Hamiltonian is H = m·σ with a real field vector m(t); a pure state is
a unit Bloch vector a with ρ = (I + a·σ)/2, and the dynamics reduce to
ȧ = 2m×a. The curvature and torsion of the quantum curve then have closed
forms in a, m and ṁ. All functions broadcast over leading axes of
3-vectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .evolution import SPEED_EPS_FACTOR, HamiltonianSchedule, TimeGrid
from .exceptions import (
    DegenerateSpeedError,
    DimensionUnsupportedError,
    InvalidInputError,
    NonFiniteStateError,
    NotNormalizedError,
)
from .hilbert import pauli_matrices

logger = logging.getLogger(__name__)

PAULI = np.stack(pauli_matrices())
BLOCH_NORM_TOL = 1e-10

Real = Union[float, np.ndarray]


def _dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.sum(x * y, axis=-1)


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def _vectors(*arrays):
    converted = [np.asarray(a, dtype=float) for a in arrays]
    for a in converted:
        if a.shape[-1:] != (3,):
            raise InvalidInputError(f"Expected real 3-vectors, got shape {a.shape}")
    return converted


@dataclass(frozen=True)
class FieldVector:
    """Field m (rad/time) and its derivative ṁ at one instant or over a stack of instants."""
    m: np.ndarray
    mdot: np.ndarray

    def __post_init__(self):
        m, mdot = _vectors(self.m, self.mdot)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(mdot))):
            raise InvalidInputError("Field vector has non-finite entries")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "mdot", mdot)


def field_operator(m: np.ndarray) -> np.ndarray:
    """H = m·σ for a field vector (stack)."""
    return np.einsum("...k,kij->...ij", np.asarray(m, dtype=float), PAULI)


class FieldSchedule(HamiltonianSchedule):
    """Qubit schedule H(t) = m(t)·σ defined by a field callback returning m and ṁ."""

    def __init__(self, field: Callable[[float], FieldVector], *, label: str = "",
                 t_max: float = 1.0, seed: int = 0):
        self._field = field
        super().__init__(
            2,
            lambda t: field_operator(self.field(t).m),
            lambda t: field_operator(self.field(t).mdot),
            label=label, t_max=t_max, seed=seed,
        )

    def field(self, t: float) -> FieldVector:
        return self._field(t)

    def field_many(self, times: np.ndarray) -> FieldVector:
        samples = [self.field(t) for t in np.asarray(times, dtype=float)]
        return FieldVector(np.stack([f.m for f in samples]), np.stack([f.mdot for f in samples]))


def bloch_from_state(state: np.ndarray) -> np.ndarray:
    """a_k = ⟨ψ|σ_k|ψ⟩ for a qubit state (stack)."""
    state = np.asarray(state, dtype=complex)
    if state.shape[-1] != 2:
        raise DimensionUnsupportedError(f"Bloch vectors need a qubit state, got dimension {state.shape[-1]}")
    return np.real(np.einsum("...i,kij,...j->...k", np.conj(state), PAULI, state))


def check_unit(a: np.ndarray, tol: float = BLOCH_NORM_TOL) -> np.ndarray:
    """Validate that Bloch vector(s) lie on the unit sphere."""
    (a,) = _vectors(a)
    norms = np.linalg.norm(a, axis=-1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise NotNormalizedError(
            f"Bloch vector is not of unit length: |norm - 1| = {np.max(np.abs(norms - 1.0)):.3e}"
        )
    return a


def state_from_bloch(a: np.ndarray) -> np.ndarray:
    """
    State with Bloch vector ``a``, first amplitude real and non-negative.

    Raises:
        NotNormalizedError: If ‖a‖ differs from 1 by more than 1e-10
    """
    a = check_unit(a)
    theta = np.arctan2(np.hypot(a[..., 0], a[..., 1]), a[..., 2])
    phi = np.arctan2(a[..., 1], a[..., 0])
    return state_from_angles(theta, phi)


def state_from_angles(theta: Real, phi: Real) -> np.ndarray:
    """cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def bloch_from_angles(theta: Real, phi: Real) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def bloch_rhs(m: np.ndarray, a: np.ndarray) -> np.ndarray:
    """ȧ = 2 m×a."""
    m, a = _vectors(m, a)
    return 2 * np.cross(m, a)


def propagate_bloch(field: Union[FieldSchedule, Callable[[float], FieldVector]],
                    a0: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """
    RK4 integration of ȧ = 2m(t)×a with ‖a‖ restored after every step.

    Args:
        field: FieldSchedule or a callable t -> FieldVector
        a0: Unit initial Bloch vector
        grid: Uniform time grid

    Returns:
        Array of shape (steps + 1, 3)
    """
    field_at = field.field if isinstance(field, FieldSchedule) else field
    a = check_unit(a0)
    times = grid.times
    dt = grid.dt
    orbit = np.empty((len(times), 3))
    orbit[0] = a
    for k in range(len(times) - 1):
        t = times[k]
        m0 = field_at(t).m
        mh = field_at(t + dt / 2).m
        m1 = field_at(t + dt).m
        k1 = 2 * np.cross(m0, a)
        k2 = 2 * np.cross(mh, a + k1 * dt / 2)
        k3 = 2 * np.cross(mh, a + k2 * dt / 2)
        k4 = 2 * np.cross(m1, a + k3 * dt)
        a = a + (k1 + 2 * k2 + 2 * k3 + k4) * dt / 6
        if not np.all(np.isfinite(a)):
            raise NonFiniteStateError(f"Bloch vector became non-finite at t={t + dt:.6g}")
        a = a / np.linalg.norm(a)
        orbit[k + 1] = a
    return orbit


@dataclass(frozen=True)
class _Kinematics:
    am: np.ndarray
    amdot: np.ndarray
    m2: np.ndarray
    v2: np.ndarray
    cross: np.ndarray
    wedge: np.ndarray
    triple: np.ndarray


def _kinematics(a, m, mdot, strict: bool = True) -> _Kinematics:
    a, m, mdot = _vectors(a, m, mdot)
    am = _dot(a, m)
    m2 = _dot(m, m)
    # ‖a×m‖² = m² - (a·m)² for unit a
    aligned = np.cross(a, m)
    v2 = _dot(aligned, aligned)
    if strict and np.any(v2 <= (SPEED_EPS_FACTOR ** 2) * m2):
        raise DegenerateSpeedError("Bloch vector is aligned with the field: the speed vanishes")
    cross = np.cross(m, mdot)
    amdot = _dot(a, mdot)
    # (a·ṁ)m - (a·m)ṁ = a×(m×ṁ)
    wedge = np.cross(a, cross)
    return _Kinematics(am=am, amdot=amdot, m2=m2, v2=v2, cross=cross,
                       wedge=wedge, triple=_dot(a, cross))


def _curvature(k: _Kinematics) -> np.ndarray:
    bend = _dot(k.cross, k.cross) - _dot(k.wedge, k.wedge)
    return 4 * k.am ** 2 / k.v2 + bend / k.v2 ** 3 + 4 * k.am * k.triple / k.v2 ** 2


def curvature_bloch(a: np.ndarray, m: np.ndarray, mdot: np.ndarray) -> Real:
    """
    Closed-form curvature coefficient of a qubit curve.

    κ² = 4(a·m)²/v² + {[m²ṁ² - (m·ṁ)²] - ‖(a·ṁ)m - (a·m)ṁ‖²}/v⁶ + 4(a·m)[a·(m×ṁ)]/v⁴
    with v² = m² - (a·m)², accumulated as ‖a×m‖². The bracket m²ṁ² - (m·ṁ)² is
    accumulated as ‖m×ṁ‖² and the vector (a·ṁ)m - (a·m)ṁ is formed as a×(m×ṁ).

    Raises:
        DegenerateSpeedError: If a is (numerically) parallel to m
    """
    return _out(_curvature(_kinematics(a, m, mdot)))


@dataclass(frozen=True)
class TorsionResidual:
    """
    Torsion from the two quotient terms before cancellation.

    ``residual`` is |value|; ``magnitude`` = ‖m×ṁ‖²/v⁶ bounds both terms and sets the
    scale of their rounding error.
    """
    value: Real
    residual: Real
    bend_term: Real
    twist_term: Real
    magnitude: Real


def torsion_bloch(a: np.ndarray, m: np.ndarray, mdot: np.ndarray) -> TorsionResidual:
    """
    Qubit torsion as the difference of its two quotient terms.

    The terms are {[m²ṁ² - (m·ṁ)²] - ‖(a·ṁ)m - (a·m)ṁ‖²}/v⁶ and [a·(m×ṁ)]²/v⁶,
    which agree for unit a so the value vanishes up to rounding.
    """
    k = _kinematics(a, m, mdot)
    bend = (_dot(k.cross, k.cross) - _dot(k.wedge, k.wedge)) / k.v2 ** 3
    twist = k.triple ** 2 / k.v2 ** 3
    value = bend - twist
    magnitude = _dot(k.cross, k.cross) / k.v2 ** 3
    return TorsionResidual(value=_out(value), residual=_out(np.abs(value)),
                           bend_term=_out(bend), twist_term=_out(twist), magnitude=_out(magnitude))


@dataclass(frozen=True)
class SpeedAcceleration:
    v: Real
    v_dot: Real


def speed_accel_bloch(a: np.ndarray, m: np.ndarray, mdot: np.ndarray) -> SpeedAcceleration:
    """v = sqrt(m² - (a·m)²) and v̇ = [m·ṁ - (a·m)(a·ṁ)]/v."""
    k = _kinematics(a, m, mdot)
    v = np.sqrt(k.v2)
    v_dot = (_dot(np.asarray(m, dtype=float), np.asarray(mdot, dtype=float)) - k.am * k.amdot) / v
    return SpeedAcceleration(v=_out(v), v_dot=_out(v_dot))


def bloch_route(a: np.ndarray, m: np.ndarray, mdot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Closed-form curvature and torsion residue along a sampled orbit.

    Returns:
        (kappa2, tau2) arrays with NaN wherever the speed is degenerate
    """
    k = _kinematics(a, m, mdot, strict=False)
    regular = k.v2 > (SPEED_EPS_FACTOR ** 2) * k.m2
    kappa2 = np.full(k.v2.shape, np.nan)
    tau2 = np.full(k.v2.shape, np.nan)
    if np.any(regular):
        kappa2[regular] = curvature_bloch(a[regular], m[regular], mdot[regular])
        tau2[regular] = torsion_bloch(a[regular], m[regular], mdot[regular]).value
    return kappa2, tau2
