"""
Exact solution of the sinusoidally driven two-level atom.

The lab-frame field is m(t) = (Ω₀cos ωt, Ω₀sin ωt, ω₀/2). Moving to the frame
rotating with the drive removes the time dependence, so the propagator
factorizes as U(t) = U_RF(t)·U_Rabi(t) and the Bloch orbit is a single
rotation of the initial vector about an axis obtained by composing two
SU(2) rotations.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import InvalidInputError, NotNormalizedError
from .hilbert import check_normalized, pauli_matrices
from .qubit import FieldSchedule, FieldVector, check_unit, field_operator

logger = logging.getLogger(__name__)

AXIS_NORM_TOL = 1e-12
NULL_AXIS_TOL = 1e-14
REGIME_FACTOR = 10.0
Z_AXIS = np.array([0.0, 0.0, 1.0])

ON_RESONANCE = "on_resonance"
OFF_RESONANCE = "off_resonance"
NEAR_RESONANCE = "near_resonance"
STRONG_DRIVING = "strong_driving"
WEAK_DRIVING = "weak_driving"

Time = Union[float, np.ndarray]

_SIGMA_X, _SIGMA_Y, _SIGMA_Z = pauli_matrices()


@dataclass(frozen=True)
class RabiParams:
    """Atomic resonance ω₀, Rabi frequency Ω₀ and drive frequency ω (all angular)."""
    omega0: float
    Omega0: float
    omega: float

    def __post_init__(self):
        for name in ("omega0", "Omega0", "omega"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidInputError(f"Rabi parameter '{name}' must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def Delta(self) -> float:
        """Detuning ω₀ - ω."""
        return self.omega0 - self.omega

    @property
    def Omega(self) -> float:
        """Generalized Rabi frequency sqrt(Ω₀² + (Δ/2)²)."""
        return math.hypot(self.Omega0, self.Delta / 2)

    @property
    def Omega_H(self) -> float:
        """Lab-frame field magnitude sqrt(Ω₀² + (ω₀/2)²)."""
        return math.hypot(self.Omega0, self.omega0 / 2)

    @property
    def delta_ratio(self) -> float:
        """ω / (2Ω); infinite when Ω = 0."""
        return self.omega / (2 * self.Omega) if self.Omega > 0 else math.inf

    @property
    def rotating_axis(self) -> np.ndarray:
        """n̂ = (Ω₀, 0, Δ/2)/Ω, or ẑ when Ω = 0."""
        if self.Omega == 0:
            return Z_AXIS.copy()
        return np.array([self.Omega0, 0.0, self.Delta / 2]) / self.Omega

    def with_value(self, name: str, value: float) -> "RabiParams":
        if name not in ("omega0", "Omega0", "omega"):
            raise InvalidInputError(f"Unknown Rabi parameter '{name}'")
        values = {"omega0": self.omega0, "Omega0": self.Omega0, "omega": self.omega}
        values[name] = value
        return RabiParams(**values)


@dataclass(frozen=True)
class AxisAngle:
    """
    Rotation by ``angle`` about the unit ``axis``.

    Composed rotations carry an angle in [0, 2π]; inputs may be any real angle.
    """
    angle: float
    axis: np.ndarray

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > AXIS_NORM_TOL:
            raise NotNormalizedError(f"Rotation axis must be a unit 3-vector, got {self.axis}")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))

    def matrix(self) -> np.ndarray:
        return su2_matrix(self)

    def rotate(self, a: np.ndarray) -> np.ndarray:
        return rotate_bloch(self, a)


def su2_matrix(rotation: AxisAngle) -> np.ndarray:
    """U(α, n̂) = cos(α/2)I - i sin(α/2) n̂·σ."""
    return _su2(np.asarray(rotation.angle), rotation.axis)


def _su2(angle: np.ndarray, axis: np.ndarray) -> np.ndarray:
    half = np.asarray(angle)[..., None, None] / 2
    return np.cos(half) * np.eye(2) - 1j * np.sin(half) * field_operator(axis)


def _compose(angle1, axis1, angle2, axis2):
    """Vectorized composition; returns (angle, axis) with the product U₁U₂."""
    c1, s1 = np.cos(np.asarray(angle1) / 2), np.sin(np.asarray(angle1) / 2)
    c2, s2 = np.cos(np.asarray(angle2) / 2), np.sin(np.asarray(angle2) / 2)
    n1 = np.broadcast_to(axis1, np.broadcast_shapes(np.shape(c1) + (3,), np.shape(axis1)))
    n2 = np.broadcast_to(axis2, np.broadcast_shapes(np.shape(c2) + (3,), np.shape(axis2)))
    c12 = c1 * c2 - s1 * s2 * np.sum(n1 * n2, axis=-1)
    v12 = (
        (s1 * c2)[..., None] * n1
        + (c1 * s2)[..., None] * n2
        + (s1 * s2)[..., None] * np.cross(n1, n2)
    )
    length = np.linalg.norm(v12, axis=-1)
    angle = 2 * np.arctan2(length, c12)
    null = length < NULL_AXIS_TOL
    safe = np.where(null, 1.0, length)
    axis = np.where(null[..., None], Z_AXIS, v12 / safe[..., None])
    return angle, axis


def compose_rotations(r1: AxisAngle, r2: AxisAngle) -> AxisAngle:
    """
    Single rotation equivalent to applying ``r2`` first and then ``r1``.

    The SU(2) matrices satisfy U(result) = U(r1)·U(r2).
    """
    angle, axis = _compose(r1.angle, r1.axis, r2.angle, r2.axis)
    return AxisAngle(float(angle), axis)


def rotate_bloch(rotation: AxisAngle, a0: np.ndarray) -> np.ndarray:
    """a = (n̂·a₀)n̂ + sin α (n̂×a₀) + cos α (n̂×a₀)×n̂."""
    return _rotate(np.asarray(rotation.angle), rotation.axis, check_unit(a0))


def _rotate(angle, axis, a0):
    along = np.sum(axis * a0, axis=-1)[..., None] * axis
    perp = np.cross(axis, a0)
    return along + np.sin(angle)[..., None] * perp + np.cos(angle)[..., None] * np.cross(perp, axis)


def rabi_field(params: RabiParams, t: Time) -> FieldVector:
    """Lab-frame field m(t) and its analytic derivative ṁ(t) = Ω₀ω(-sin ωt, cos ωt, 0)."""
    t = np.asarray(t, dtype=float)
    phase = params.omega * t
    m = np.stack([
        params.Omega0 * np.cos(phase),
        params.Omega0 * np.sin(phase),
        np.full_like(phase, params.omega0 / 2),
    ], axis=-1)
    mdot = np.stack([
        -params.Omega0 * params.omega * np.sin(phase),
        params.Omega0 * params.omega * np.cos(phase),
        np.zeros_like(phase),
    ], axis=-1)
    return FieldVector(m, mdot)


def rabi_hamiltonian(params: RabiParams, t: Time) -> np.ndarray:
    return field_operator(rabi_field(params, t).m)


def rabi_hamiltonian_rotating(params: RabiParams) -> np.ndarray:
    """H_Rabi = Ω₀σ_x + (Δ/2)σ_z."""
    return params.Omega0 * _SIGMA_X + (params.Delta / 2) * _SIGMA_Z


def rotating_frame_unitary(params: RabiParams, t: Time) -> np.ndarray:
    """U_RF(t) = exp(-i(ω/2)tσ_z)."""
    half = params.omega * np.asarray(t, dtype=float) / 2
    out = np.zeros(half.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-1j * half)
    out[..., 1, 1] = np.exp(1j * half)
    return out


def rotating_frame_hamiltonian(params: RabiParams, t: Time) -> np.ndarray:
    """U_RF†(t)H(t)U_RF(t) - (ω/2)σ_z, which is time independent."""
    u = rotating_frame_unitary(params, t)
    u_dag = np.conj(np.swapaxes(u, -1, -2))
    return u_dag @ rabi_hamiltonian(params, t) @ u - (params.omega / 2) * _SIGMA_Z


def rabi_propagator(params: RabiParams, t: Time) -> np.ndarray:
    """
    Exact lab-frame propagator U(t) = U_RF(t)·[cos(Ωt)I - i sin(Ωt) n̂·σ].

    When Ω = 0 the rotating-frame factor is the identity.
    """
    t = np.asarray(t, dtype=float)
    u_rabi = _su2(2 * params.Omega * t, params.rotating_axis)
    return rotating_frame_unitary(params, t) @ u_rabi


def rabi_axis_angle(params: RabiParams, t: float) -> AxisAngle:
    """
    Single rotation (α, n̂) with U(α, n̂) = U(t), from (ωt, ẑ) composed with (2Ωt, n̂_rot).

    α is reported in [0, 2π]. An accumulated angle α in (2π, 4π) comes back as
    (4π - α, -n̂), which is the same SU(2) element, so without driving the axis
    reads -ẑ while ω₀t lies in (2π, 4π).
    """
    angle, axis = _compose(params.omega * t, Z_AXIS, 2 * params.Omega * t, params.rotating_axis)
    return AxisAngle(float(angle), axis)


def tan2_half_angle(params: RabiParams, t: Time) -> Union[float, np.ndarray]:
    """
    tan²(α/2) of the composed rotation in closed form.

    Infinite where cos(α/2) vanishes.
    """
    t = np.asarray(t, dtype=float)
    c, s = np.cos(params.omega * t / 2), np.sin(params.omega * t / 2)
    if params.Omega == 0:
        sin_rabi, cos_rabi = np.zeros_like(t), np.ones_like(t)
        transverse, detuning = 0.0, 1.0
    else:
        sin_rabi, cos_rabi = np.sin(params.Omega * t), np.cos(params.Omega * t)
        transverse = params.Omega0 / params.Omega
        detuning = params.Delta / (2 * params.Omega)
    numerator = (
        (transverse * c * sin_rabi) ** 2
        + (transverse * s * sin_rabi) ** 2
        + (s * cos_rabi + detuning * c * sin_rabi) ** 2
    )
    denominator = (c * cos_rabi - detuning * s * sin_rabi) ** 2
    with np.errstate(divide="ignore"):
        ratio = np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), np.inf)
    return float(ratio) if ratio.ndim == 0 else ratio


def bloch_exact(params: RabiParams, a0: np.ndarray, t: Time) -> np.ndarray:
    """
    Closed-form Bloch orbit a(t) from unit initial vector ``a0``.

    Raises:
        NotNormalizedError: If ‖a0‖ differs from 1
    """
    a0 = check_unit(a0)
    t = np.asarray(t, dtype=float)
    angle, axis = _compose(params.omega * t, Z_AXIS, 2 * params.Omega * t, params.rotating_axis)
    return _rotate(angle, axis, a0)


def exact_states(params: RabiParams, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """U(t)|ψ₀⟩ for every t in ``times``."""
    psi0 = check_normalized(np.asarray(psi0, dtype=complex))
    return np.einsum("...ij,j->...i", rabi_propagator(params, times), psi0)


def rabi_schedule(params: RabiParams, t_max: float = 1.0) -> FieldSchedule:
    """Lab-frame qubit schedule H(t) = m(t)·σ with the analytic ṁ."""
    label = f"rabi(omega0={params.omega0:g}, Omega0={params.Omega0:g}, omega={params.omega:g})"
    return FieldSchedule(lambda t: rabi_field(params, t), label=label, t_max=t_max)


def _clearly_below(x: float, bound: float) -> bool:
    return x < bound and not math.isclose(x, bound, rel_tol=1e-9, abs_tol=1e-15)


def _at_most(x: float, bound: float) -> bool:
    return x <= bound or math.isclose(x, bound, rel_tol=1e-9, abs_tol=1e-15)


def classify_regime(params: RabiParams) -> frozenset:
    """
    Regime labels from factor-10 thresholds.

    Detuning labels are strict (a detuning equal to 0.1·Ω₀ is near resonance);
    driving labels include their boundary (Ω₀ = 0.1·ω₀ is weak driving).
    """
    detuning = abs(params.Delta)
    labels = set()
    if _clearly_below(detuning, params.Omega0 / REGIME_FACTOR):
        labels.add(ON_RESONANCE)
    elif _clearly_below(REGIME_FACTOR * params.Omega0, detuning):
        labels.add(OFF_RESONANCE)
    else:
        labels.add(NEAR_RESONANCE)
    if _at_most(REGIME_FACTOR * abs(params.omega0), params.Omega0):
        labels.add(STRONG_DRIVING)
    elif _at_most(params.Omega0, abs(params.omega0) / REGIME_FACTOR):
        labels.add(WEAK_DRIVING)
    return frozenset(labels)
