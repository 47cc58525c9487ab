"""
Time evolution of pure states under a time-dependent Hamiltonian.

Provides the schedule abstraction H(t), Ḣ(t), two fixed-step integrators,
and the construction of a parallel-transported trajectory with its speed,
arc length and speed derivative sampled on a uniform time grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .exceptions import (
    DegenerateSpeedError,
    InvalidInputError,
    InvalidScheduleError,
    NonFiniteStateError,
    NonHermitianError,
)
from .hilbert import (
    apply,
    check_hermitian,
    check_normalized,
    expectation,
    frobenius_norm,
    hermiticity_residue,
    identity_like,
    inner,
    variance,
)

logger = logging.getLogger(__name__)

METHODS = ("rk4", "midpoint_exponential")
SPEED_EPS_FACTOR = 1e-9
SELF_CHECK_POINTS = 10
DERIVATIVE_RTOL = 1e-6
DERIVATIVE_ATOL = 1e-8
NORM_DRIFT_WARNING = 1e-6

OperatorFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i·t_max/steps, i = 0..steps."""
    t_max: float
    steps: int

    def __post_init__(self):
        if not np.isfinite(self.t_max) or self.t_max <= 0:
            raise InvalidInputError(f"t_max must be a positive number, got {self.t_max}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise InvalidInputError(f"steps must be an integer >= 2, got {self.steps}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, int(self.steps) + 1)

    @property
    def dt(self) -> float:
        return self.t_max / self.steps


class HamiltonianSchedule:
    """
    A Hermitian operator H(t) together with its time derivative Ḣ(t).

    When no analytic derivative is supplied, Ḣ is obtained from a 5-point
    central difference with step h = max(1e-6, 1e-6·t_max). An analytic
    derivative is checked against that difference at random times on
    construction.
    """

    def __init__(
        self,
        dimension: int,
        hamiltonian: OperatorFn,
        derivative: Optional[OperatorFn] = None,
        *,
        label: str = "",
        t_max: float = 1.0,
        seed: int = 0,
    ):
        if dimension < 2:
            raise InvalidInputError(f"Hilbert space dimension must be >= 2, got {dimension}")
        self.dimension = int(dimension)
        self.label = label
        self.t_max = float(t_max)
        self.fd_step = max(1e-6, 1e-6 * self.t_max)
        self._hamiltonian = hamiltonian
        self._derivative = derivative
        self._self_check(seed)

    @classmethod
    def stationary(cls, hamiltonian: np.ndarray, label: str = "stationary") -> "HamiltonianSchedule":
        """A time-independent schedule with Ḣ ≡ 0."""
        h = np.array(hamiltonian, dtype=complex)
        zero = np.zeros_like(h)
        return cls(h.shape[-1], lambda t: h, lambda t: zero, label=label)

    @property
    def has_analytic_derivative(self) -> bool:
        return self._derivative is not None

    def evaluate(self, t: float) -> np.ndarray:
        h = np.asarray(self._hamiltonian(t), dtype=complex)
        if h.shape != (self.dimension, self.dimension):
            raise InvalidScheduleError(
                f"Schedule '{self.label}' returned shape {h.shape} at t={t}, "
                f"expected ({self.dimension}, {self.dimension})"
            )
        return h

    def derivative(self, t: float) -> np.ndarray:
        if self._derivative is None:
            return self.finite_difference(t)
        hdot = np.asarray(self._derivative(t), dtype=complex)
        if hdot.shape != (self.dimension, self.dimension):
            raise InvalidScheduleError(
                f"Derivative of schedule '{self.label}' returned shape {hdot.shape} at t={t}"
            )
        return hdot

    def finite_difference(self, t: float) -> np.ndarray:
        """5-point central difference of H at ``t``."""
        h = self.fd_step
        return (
            -self.evaluate(t + 2 * h)
            + 8 * self.evaluate(t + h)
            - 8 * self.evaluate(t - h)
            + self.evaluate(t - 2 * h)
        ) / (12 * h)

    def evaluate_many(self, times: np.ndarray) -> np.ndarray:
        return np.stack([self.evaluate(t) for t in np.asarray(times, dtype=float)])

    def derivative_many(self, times: np.ndarray) -> np.ndarray:
        return np.stack([self.derivative(t) for t in np.asarray(times, dtype=float)])

    def _self_check(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for t in rng.uniform(0.0, self.t_max, SELF_CHECK_POINTS):
            h = self.evaluate(t)
            try:
                check_hermitian(h)
            except NonHermitianError:
                raise InvalidScheduleError(
                    f"Schedule '{self.label}' is not Hermitian at t={t:.6g} "
                    f"(residue {hermiticity_residue(h):.3e})"
                )
            if self._derivative is None:
                continue
            analytic = self.derivative(t)
            numeric = self.finite_difference(t)
            deviation = float(frobenius_norm(analytic - numeric))
            tolerance = (DERIVATIVE_RTOL * float(frobenius_norm(analytic))
                         + DERIVATIVE_ATOL * max(1.0, float(frobenius_norm(h))))
            if deviation > tolerance:
                raise InvalidScheduleError(
                    f"Analytic derivative of schedule '{self.label}' disagrees with the "
                    f"finite difference at t={t:.6g}: |deviation| = {deviation:.3e} > {tolerance:.3e}"
                )
            worst = max(worst, deviation)
        logger.debug("Schedule '%s' passed its self-check (max derivative deviation %.3e)",
                     self.label, worst)


@dataclass(frozen=True)
class Trajectory:
    """A sampled quantum curve and the kinematic quantities along it."""
    times: np.ndarray
    raw_states: np.ndarray
    transported_states: np.ndarray
    beta: np.ndarray
    speed: np.ndarray
    arc_length: np.ndarray
    v_dot: np.ndarray
    hamiltonians: np.ndarray = field(repr=False)
    hamiltonian_derivatives: np.ndarray = field(repr=False)
    method: str = "external"
    norm_drift: float = 0.0

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self) -> int:
        return len(self.times)


def speed_threshold(hamiltonian: np.ndarray):
    """ε_v = 1e-9·‖H‖_F, below which the speed is treated as zero."""
    return SPEED_EPS_FACTOR * frobenius_norm(hamiltonian)


def _rhs(schedule: HamiltonianSchedule, t: float, psi: np.ndarray) -> np.ndarray:
    return -1j * (schedule.evaluate(t) @ psi)


def _exponential_step(h: np.ndarray, dt: float) -> np.ndarray:
    evs, evecs = sla.eigh(h)
    return evecs @ (np.exp(-1.0j * dt * evs)[:, None] * evecs.conj().T)


def _check_finite(psi: np.ndarray, t: float, method: str) -> None:
    if not np.all(np.isfinite(psi)):
        raise NonFiniteStateError(
            f"State became non-finite at t={t:.6g} with method '{method}': reduce the time step"
        )


def propagate(
    schedule: HamiltonianSchedule,
    psi0: np.ndarray,
    grid: TimeGrid,
    method: str = "rk4",
) -> Trajectory:
    """
    Integrate i∂_t|ψ⟩ = H(t)|ψ⟩ on a uniform grid.

    Args:
        schedule: Hamiltonian schedule
        psi0: Normalized initial state
        grid: Uniform time grid
        method: 'rk4' (renormalized every step, drift recorded) or
            'midpoint_exponential' (exact exponential of H(t + dt/2))

    Returns:
        Trajectory sampled on ``grid.times``

    Raises:
        NotNormalizedError: If ``psi0`` is not normalized
        NonFiniteStateError: If an amplitude becomes NaN or infinite
    """
    if method not in METHODS:
        raise InvalidInputError(f"Unknown integrator '{method}', expected one of {METHODS}")
    psi = check_normalized(np.asarray(psi0, dtype=complex))
    if psi.shape != (schedule.dimension,):
        raise InvalidInputError(
            f"Initial state has shape {psi.shape}, schedule dimension is {schedule.dimension}"
        )
    times = grid.times
    dt = grid.dt
    states = np.empty((len(times), schedule.dimension), dtype=complex)
    states[0] = psi
    drift = 0.0

    logger.debug("Propagating '%s' with %s: %d steps, dt=%.3e",
                 schedule.label, method, grid.steps, dt)
    for k in range(len(times) - 1):
        t = times[k]
        if method == "rk4":
            k1 = _rhs(schedule, t, psi)
            k2 = _rhs(schedule, t + dt / 2, psi + k1 * dt / 2)
            k3 = _rhs(schedule, t + dt / 2, psi + k2 * dt / 2)
            k4 = _rhs(schedule, t + dt, psi + k3 * dt)
            nxt = psi + (k1 + 2 * k2 + 2 * k3 + k4) * dt / 6
            _check_finite(nxt, t + dt, method)
            norm = np.linalg.norm(nxt)
            drift = max(drift, abs(norm - 1.0))
            psi = nxt / norm
        else:
            psi = _exponential_step(schedule.evaluate(t + dt / 2), dt) @ psi
            _check_finite(psi, t + dt, method)
        states[k + 1] = psi

    if drift > NORM_DRIFT_WARNING:
        logger.warning("rk4 norm drift %.3e is large: consider more steps", drift)
    logger.debug("Propagation finished, norm drift %.3e", drift)
    return trajectory_from_states(schedule, times, states, method=method, norm_drift=drift)


def geometric_phase(times: np.ndarray, raw_states: np.ndarray,
                    schedule: HamiltonianSchedule) -> np.ndarray:
    """β(t) = ∫₀ᵗ ⟨ψ|H|ψ⟩ dt′ by composite Simpson on the grid."""
    energies = expectation(schedule.evaluate_many(times), raw_states)
    return _phase_from_energies(times, energies)


def _phase_from_energies(times: np.ndarray, energies: np.ndarray) -> np.ndarray:
    return cumulative_simpson(np.asarray(energies, dtype=float), x=times, initial=0.0)


def arc_length(trajectory: Trajectory) -> np.ndarray:
    """s(t) by composite trapezoid of the speed, s(t₀) = 0."""
    return cumulative_trapezoid(trajectory.speed, trajectory.times, initial=0.0)


def trajectory_from_states(
    schedule: HamiltonianSchedule,
    times: np.ndarray,
    raw_states: np.ndarray,
    *,
    method: str = "external",
    norm_drift: float = 0.0,
) -> Trajectory:
    """
    Build a Trajectory from states already sampled on a uniform grid.

    Speed derivatives at points where v <= ε_v are reported as NaN.
    """
    times = np.asarray(times, dtype=float)
    states = check_normalized(np.asarray(raw_states, dtype=complex))
    if states.shape != (len(times), schedule.dimension):
        raise InvalidInputError(
            f"Expected {len(times)} states of dimension {schedule.dimension}, got {states.shape}"
        )
    if len(times) < 3 or np.any(np.diff(times) <= 0):
        raise InvalidInputError("Times must be increasing with at least 3 samples")

    hams = schedule.evaluate_many(times)
    hdots = schedule.derivative_many(times)
    energies = expectation(hams, states)
    beta = _phase_from_energies(times, energies)
    transported = np.exp(1j * beta)[:, None] * states
    speeds = np.sqrt(variance(hams, states))
    s = cumulative_trapezoid(speeds, times, initial=0.0)

    regular = speeds > speed_threshold(hams)
    v_dots = np.full(len(times), np.nan)
    if np.any(regular):
        v_dots[regular] = _speed_derivative(hams[regular], hdots[regular],
                                            states[regular], speeds[regular])
    return Trajectory(
        times=times, raw_states=states, transported_states=transported, beta=beta,
        speed=speeds, arc_length=s, v_dot=v_dots, hamiltonians=hams,
        hamiltonian_derivatives=hdots, method=method, norm_drift=float(norm_drift),
    )


def _speed_derivative(h, hdot, state, v):
    eye = identity_like(h)
    dh = h - np.asarray(expectation(h, state))[..., None, None] * eye
    dhdot = hdot - np.asarray(expectation(hdot, state))[..., None, None] * eye
    return np.asarray(expectation(dhdot @ dh + dh @ dhdot, state)) / (2 * v)


def speed(schedule: HamiltonianSchedule, state: np.ndarray, t: float) -> float:
    """v = sqrt(⟨(ΔH)²⟩) at time ``t``."""
    return float(np.sqrt(variance(schedule.evaluate(t), np.asarray(state, dtype=complex))))


def _regular_speed(h: np.ndarray, state: np.ndarray) -> float:
    v = float(np.sqrt(variance(h, state)))
    if v <= float(speed_threshold(h)):
        raise DegenerateSpeedError(f"Evolution speed {v:.3e} is below the degeneracy threshold")
    return v


def v_dot(schedule: HamiltonianSchedule, state: np.ndarray, t: float) -> float:
    """
    v̇ = ⟨ΔḢΔH + ΔHΔḢ⟩ / (2v).

    Raises:
        DegenerateSpeedError: If v <= ε_v
    """
    state = np.asarray(state, dtype=complex)
    h = schedule.evaluate(t)
    v = _regular_speed(h, state)
    return float(_speed_derivative(h, schedule.derivative(t), state, v))


def tangent_vector(schedule: HamiltonianSchedule, state: np.ndarray, t: float) -> np.ndarray:
    """
    Unit tangent |T⟩ = -iΔh|Ψ⟩ with Δh = ΔH/v.

    Raises:
        DegenerateSpeedError: If v <= ε_v
    """
    state = np.asarray(state, dtype=complex)
    h = schedule.evaluate(t)
    v = _regular_speed(h, state)
    dh = h - expectation(h, state) * identity_like(h)
    return -1j * apply(dh, state) / v


_STENCILS = {
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60,
}


def central_difference(values: np.ndarray, dt: float, order: int = 4) -> np.ndarray:
    """
    Central difference of the given order (4 or 6) along the first axis.

    The first and last ``order // 2`` entries have no symmetric stencil and are NaN.
    """
    if order not in _STENCILS:
        raise InvalidInputError(f"Central differences are available at order 4 or 6, got {order}")
    weights = _STENCILS[order]
    width = len(weights)
    values = np.asarray(values)
    if len(values) < width:
        raise InvalidInputError(f"A {width}-point stencil needs at least {width} samples, got {len(values)}")
    half = width // 2
    out = np.full(values.shape, np.nan, dtype=np.result_type(values.dtype, float))
    interior = len(values) - 2 * half
    out[half:-half] = sum(weight * values[j:j + interior] for j, weight in enumerate(weights) if weight) / dt
    return out


def parallel_transport_residual(trajectory: Trajectory) -> np.ndarray:
    """|⟨Ψ|Ψ̇⟩| / v along the trajectory, NaN at stencil endpoints and degenerate points."""
    psi = trajectory.transported_states
    dpsi = central_difference(psi, trajectory.dt)
    overlap = np.abs(inner(psi, dpsi))
    with np.errstate(divide="ignore", invalid="ignore"):
        residual = overlap / trajectory.speed
    residual[trajectory.speed <= speed_threshold(trajectory.hamiltonians)] = np.nan
    return residual
