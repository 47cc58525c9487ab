"""
Invariant suite run by ``quantum-frenet validate``.

Every check draws its random inputs from a seeded generator, measures the
worst deviation from an exact identity or oracle, and compares it with a
tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .evolution import TimeGrid, parallel_transport_residual, propagate
from .frenet import (
    curvature_expectation,
    curvature_statistical,
    expectation_route,
    projector_route,
    route_gap,
    stationary_collapse,
    torsion_expectation,
    torsion_generalized_variance,
)
from .hilbert import (
    central_moments,
    expectation_complex,
    frobenius_norm,
    generalized_variance,
    random_hermitian,
    random_state,
)
from .qubit import (
    bloch_from_state,
    bloch_route,
    curvature_bloch,
    field_operator,
    propagate_bloch,
    state_from_angles,
    state_from_bloch,
    torsion_bloch,
)
from .rabi import (
    AxisAngle,
    RabiParams,
    bloch_exact,
    compose_rotations,
    exact_states,
    rabi_propagator,
    rabi_schedule,
    su2_matrix,
)
from .scenarios import qutrit_schedule

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240521
DEFAULT_DRAWS = 1000
MIN_DRAW_SPEED = 1e-3

# Weak, strong, on-resonance and off-resonance driving, and the undriven atom
PROPAGATOR_PARAMS = (
    RabiParams(1.0, 0.1, 0.9),
    RabiParams(0.05, 1.0, 0.05),
    RabiParams(1.0, 0.1, 1.0),
    RabiParams(1.0, 0.01, 5.0),
    RabiParams(1.0, 0.0, 0.9),
)
# (Ω₀, θ) of the near-resonance runs with ω₀ = 1, ω = 0.9, started at (θ, φ = 0)
ROUTE_AGREEMENT_RUNS = ((0.1, math.pi), (1.0, math.pi), (0.1, 3 * math.pi / 4), (1.0, 3 * math.pi / 4))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class QubitDraw:
    a: np.ndarray
    m: np.ndarray
    mdot: np.ndarray


def qubit_draws(rng: np.random.Generator, count: int, min_speed: float = MIN_DRAW_SPEED) -> Iterator[QubitDraw]:
    """
    Random unit Bloch vectors with fields of magnitude in [0.5, 2] and ‖ṁ‖ <= 2.

    The speed ratio v/‖m‖ is log-uniform between 1.01·``min_speed``/‖m‖ and 1, so
    nearly aligned (slow) points are drawn as often as generic ones.
    """
    for _ in range(count):
        m = rng.normal(size=3)
        m *= rng.uniform(0.5, 2.0) / np.linalg.norm(m)
        norm_m = np.linalg.norm(m)
        ratio = math.exp(rng.uniform(math.log(1.01 * min_speed / norm_m), 0.0))
        across = rng.normal(size=3)
        across -= (across @ m) * m / norm_m ** 2
        across /= np.linalg.norm(across)
        along = math.copysign(math.sqrt(1.0 - ratio ** 2), rng.uniform(-1.0, 1.0))
        a = along * m / norm_m + ratio * across
        a /= np.linalg.norm(a)
        mdot = rng.normal(size=3)
        mdot *= rng.uniform(0.0, 2.0) / np.linalg.norm(mdot)
        yield QubitDraw(a, m, mdot)


def _result(name: str, measured: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(measured <= tolerance), float(measured), float(tolerance), detail)


def _infidelity(exact: np.ndarray, numeric: np.ndarray) -> float:
    fidelity = np.abs(np.einsum("ij,ij->i", np.conj(exact), numeric)) ** 2
    return float(np.max(1.0 - fidelity))


def check_expectation_real(rng, draws):
    worst = 0.0
    for i in range(draws):
        n = 2 + i % 3
        op = random_hermitian(rng, n)
        state = random_state(rng, n)
        worst = max(worst, abs(expectation_complex(op, state).imag) / float(frobenius_norm(op)))
    return _result("hilbert: expectation values are real", worst, 1e-12)


def check_moment_inequality(rng, draws):
    worst = -math.inf
    for i in range(draws):
        n = 2 + i % 3
        moments = central_moments(random_hermitian(rng, n), random_state(rng, n))
        worst = max(worst, 1.0 + moments.skewness ** 2 - moments.kurtosis)
    return _result("hilbert: kurtosis bound α₄ >= 1 + α₃²", worst, 1e-10)


def check_generalized_variance(rng, draws):
    worst = 0.0
    for i in range(draws):
        n = 2 + i % 3
        sigma = generalized_variance(random_hermitian(rng, n), random_hermitian(rng, n), random_state(rng, n))
        worst = max(worst, -sigma.determinant)
    return _result("hilbert: generalized variance is non-negative", worst, 1e-10)


def check_exact_propagator(rng, draws):
    worst = 0.0
    psi0 = np.array([0.0, 1.0], dtype=complex)
    for params in PROPAGATOR_PARAMS:
        t_max = 20 / params.Omega
        grid = TimeGrid(t_max, 10_000)
        trajectory = propagate(rabi_schedule(params, t_max), psi0, grid)
        exact = exact_states(params, psi0, grid.times)
        worst = max(worst, _infidelity(exact, trajectory.raw_states))
    return _result("evolution: rk4 vs exact Rabi propagator", worst, 1e-8,
                   f"max infidelity over t in [0, 20/Ω], {len(PROPAGATOR_PARAMS)} parameter sets")


def check_convergence_order(rng, draws):
    params = RabiParams(1.0, 1.0, 0.9)
    t_max = 20 / params.Omega
    schedule = rabi_schedule(params, t_max)
    psi0 = np.array([0.0, 1.0], dtype=complex)
    errors = []
    for steps in (200, 400):
        grid = TimeGrid(t_max, steps)
        trajectory = propagate(schedule, psi0, grid)
        exact = exact_states(params, psi0, grid.times)
        errors.append(np.max(np.linalg.norm(trajectory.raw_states - exact, axis=-1)))
    order = math.log2(errors[0] / errors[1])
    return CheckResult("evolution: rk4 convergence order", order >= 3.5, order, 3.5,
                       "observed order, must be at least the tolerance")


def check_parallel_transport(rng, draws):
    params = RabiParams(1.0, 0.1, 0.9)
    grid = TimeGrid(20.0, 2000)
    trajectory = propagate(rabi_schedule(params, grid.t_max), state_from_angles(math.pi, 0.0), grid)
    residual = float(np.nanmax(parallel_transport_residual(trajectory)))
    return _result("evolution: parallel transport ⟨Ψ|Ψ̇⟩ = 0", residual, 1e-6, "relative to v")


def curvature_scale(a: np.ndarray, m: np.ndarray, mdot: np.ndarray) -> float:
    """4(a·m)²/v² + ‖m×ṁ‖²/v⁶, the size of the terms whose sum is the qubit κ²."""
    v2 = float(np.sum(np.cross(a, m) ** 2))
    return 4 * float(a @ m) ** 2 / v2 + float(np.sum(np.cross(m, mdot) ** 2)) / v2 ** 3


def check_bloch_curvature(rng, draws):
    worst = 0.0
    for draw in qubit_draws(rng, draws):
        closed = curvature_bloch(draw.a, draw.m, draw.mdot)
        state = state_from_bloch(draw.a)
        matrix = curvature_expectation(field_operator(draw.m), field_operator(draw.mdot), state)
        scale = max(1.0, closed, curvature_scale(draw.a, draw.m, draw.mdot))
        worst = max(worst, abs(closed - matrix) / scale)
    return _result("qubit: closed-form curvature vs expectation route", worst, 1e-10,
                   f"relative to the term sizes, v > {MIN_DRAW_SPEED:g}")


def check_vanishing_torsion_closed_form(rng, draws):
    worst = 0.0
    for draw in qubit_draws(rng, draws):
        torsion = torsion_bloch(draw.a, draw.m, draw.mdot)
        scale = max(1.0, curvature_bloch(draw.a, draw.m, draw.mdot), torsion.magnitude)
        worst = max(worst, torsion.residual / scale)
    return _result("qubit: vanishing torsion (closed form)", worst, 1e-12, "relative to ‖m×ṁ‖²/v⁶")


def check_vanishing_torsion_expectation(rng, draws):
    worst = 0.0
    for draw in qubit_draws(rng, draws):
        state = state_from_bloch(draw.a)
        worst = max(worst, abs(torsion_expectation(field_operator(draw.m), field_operator(draw.mdot), state)))
    return _result("qubit: vanishing torsion (expectation route)", worst, 1e-8)


def check_vanishing_torsion_generalized_variance(rng, draws):
    worst = 0.0
    for draw in qubit_draws(rng, draws):
        state = state_from_bloch(draw.a)
        value = torsion_generalized_variance(field_operator(draw.m), field_operator(draw.mdot), state)
        worst = max(worst, abs(value))
    return _result("qubit: vanishing torsion (generalized variance)", worst, 1e-10)


def check_vanishing_torsion_projector(rng, draws):
    params = RabiParams(1.0, 1.0, 0.9)
    grid = TimeGrid(10.0, 4000)
    trajectory = propagate(rabi_schedule(params, grid.t_max), state_from_angles(3 * math.pi / 4, 0.0), grid)
    _, tau2 = projector_route(trajectory)
    return _result("qubit: vanishing torsion (projector route)", float(np.nanmax(tau2)), 1e-6)


def check_stationary_collapse(rng, draws):
    worst = 0.0
    for i in range(max(1, draws // 2)):
        n = 2 + i % 3
        h = random_hermitian(rng, n)
        state = random_state(rng, n)
        kappa2, tau2 = stationary_collapse(h, state)
        moments = central_moments(h, state)
        worst = max(worst,
                    abs(kappa2 - (moments.kurtosis - 1)),
                    abs(tau2 - (moments.kurtosis - 1 - moments.skewness ** 2)))
    return _result("frenet: stationary limit reduces to α₄ - 1 and α₄ - 1 - α₃²", worst, 1e-12)


def check_statistical_decomposition(rng, draws):
    worst = 0.0
    violations = 0
    for i in range(max(1, draws // 2)):
        n = 2 + i % 3
        h = random_hermitian(rng, n)
        hdot = random_hermitian(rng, n)
        state = random_state(rng, n)
        parts = curvature_statistical(h, hdot, state)
        kappa2 = curvature_expectation(h, hdot, state)
        tau2 = torsion_expectation(h, hdot, state)
        scale = max(1.0, abs(kappa2))
        worst = max(worst, abs(parts.kappa2 - kappa2) / scale, abs(parts.tau2 - tau2) / scale)
        violations += not parts.acceleration_bound_ok
    passed = worst <= 1e-9 and violations == 0
    return CheckResult("frenet: statistical decomposition sums to the direct route", passed, worst, 1e-9,
                       f"{violations} violations of v̇² <= σ²(Ḣ)")


def check_route_agreement(rng, draws):
    closed_gap = projector_gap = 0.0
    for Omega0, theta in ROUTE_AGREEMENT_RUNS:
        params = RabiParams(1.0, Omega0, 0.9)
        grid = TimeGrid(80.0, 8000)
        schedule = rabi_schedule(params, grid.t_max)
        trajectory = propagate(schedule, state_from_angles(theta, 0.0), grid)
        kappa_expect, _ = expectation_route(trajectory)
        kappa_projector, _ = projector_route(trajectory)
        fields = schedule.field_many(grid.times)
        kappa_bloch, _ = bloch_route(bloch_from_state(trajectory.raw_states), fields.m, fields.mdot)
        closed_gap = max(closed_gap, route_gap(kappa_bloch, kappa_expect))
        projector_gap = max(projector_gap, route_gap(kappa_expect, kappa_projector))
    passed = closed_gap <= 1e-9 and projector_gap <= 1e-4
    return CheckResult("frenet: three-way curvature agreement (Rabi, near resonance)", passed,
                       projector_gap, 1e-4,
                       f"closed form vs expectation {closed_gap:.2e} (tolerance 1e-9), "
                       f"{len(ROUTE_AGREEMENT_RUNS)} runs at 8000 steps")


def check_rotation_composition(rng, draws):
    worst = 0.0
    for _ in range(draws * 10):
        axes = rng.normal(size=(2, 3))
        axes /= np.linalg.norm(axes, axis=1)[:, None]
        angles = rng.uniform(-4 * math.pi, 4 * math.pi, size=2)
        r1, r2 = AxisAngle(angles[0], axes[0]), AxisAngle(angles[1], axes[1])
        product = su2_matrix(r1) @ su2_matrix(r2)
        worst = max(worst, float(np.max(np.abs(su2_matrix(compose_rotations(r1, r2)) - product))))
    return _result("rabi: SU(2) rotation composition", worst, 1e-12)


def check_closed_form_orbit(rng, draws):
    params = RabiParams(1.0, 0.1, 0.9)
    grid = TimeGrid(50.0, 10000)
    a0 = np.array([0.0, 0.0, -1.0])
    ode = propagate_bloch(rabi_schedule(params, grid.t_max), a0, grid)
    exact = bloch_exact(params, a0, grid.times)
    worst = float(np.max(np.linalg.norm(ode - exact, axis=-1)))
    return _result("rabi: closed-form orbit vs Bloch ODE", worst, 1e-6)


def check_exact_trajectory_unitarity(rng, draws):
    params = RabiParams(1.0, 1.0, 0.9)
    times = rng.uniform(0.0, 50.0, size=draws)
    u = rabi_propagator(params, times)
    deviation = np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(2))
    return _result("rabi: exact propagator is unitary", float(np.max(deviation)), 1e-12)


def check_qutrit_torsion(rng, draws):
    grid = TimeGrid(10.0, 4000)
    schedule = qutrit_schedule(1.0, 0.5, 0.9, 0.3, t_max=grid.t_max)
    psi0 = np.ones(3, dtype=complex) / math.sqrt(3)
    trajectory = propagate(schedule, psi0, grid)
    _, tau_expect = expectation_route(trajectory)
    _, tau_projector = projector_route(trajectory)
    gap = route_gap(tau_expect, tau_projector)
    peak = float(np.nanmax(tau_expect))
    return CheckResult("qutrit: torsion is positive and routes agree", peak > 0 and gap <= 1e-4, gap, 1e-4,
                       f"max τ² = {peak:.3e}")


CHECKS: tuple[Callable[[np.random.Generator, int], CheckResult], ...] = (
    check_expectation_real,
    check_moment_inequality,
    check_generalized_variance,
    check_exact_propagator,
    check_convergence_order,
    check_parallel_transport,
    check_bloch_curvature,
    check_vanishing_torsion_closed_form,
    check_vanishing_torsion_expectation,
    check_vanishing_torsion_generalized_variance,
    check_vanishing_torsion_projector,
    check_stationary_collapse,
    check_statistical_decomposition,
    check_route_agreement,
    check_rotation_composition,
    check_exact_trajectory_unitarity,
    check_closed_form_orbit,
    check_qutrit_torsion,
)


def run_check(check: Callable, seed: int, draws: int, index: int) -> CheckResult:
    """Run one check with its own generator; exceptions count as failures."""
    rng = np.random.default_rng([seed, index])
    name = check.__name__.removeprefix("check_").replace("_", " ")
    try:
        result = check(rng, draws)
    except Exception as e:  # a crashing check is a failed invariant
        logger.debug("Check %s raised", name, exc_info=True)
        return CheckResult(name, False, math.nan, math.nan, f"{type(e).__name__}: {e}")
    logger.debug("%s: measured %.3e (tolerance %.1e)", result.name, result.measured, result.tolerance)
    return result


def run_checks(seed: int = DEFAULT_SEED, draws: int = DEFAULT_DRAWS,
               progress: Optional[Callable[[Iterator], Iterator]] = None) -> list[CheckResult]:
    """Run the whole suite; ``progress`` may wrap the iteration (e.g. with tqdm)."""
    indexed = list(enumerate(CHECKS))
    iterator = progress(indexed) if progress else indexed
    return [run_check(check, seed, draws, index) for index, check in iterator]
