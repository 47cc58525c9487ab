import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from quantum_frenet.checks import curvature_scale, qubit_draws
from quantum_frenet.evolution import TimeGrid, propagate
from quantum_frenet.exceptions import (
    DegenerateSpeedError,
    DimensionUnsupportedError,
    InvalidInputError,
    NotNormalizedError,
)
from quantum_frenet.frenet import (
    curvature_expectation,
    curvature_statistical,
    torsion_expectation,
    torsion_generalized_variance,
)
from quantum_frenet.hilbert import (
    anticommutator,
    commutator,
    covariance,
    delta_operator,
    expectation_complex,
)
from quantum_frenet.qubit import (
    FieldSchedule,
    FieldVector,
    bloch_from_angles,
    bloch_from_state,
    bloch_route,
    bloch_rhs,
    curvature_bloch,
    field_operator,
    propagate_bloch,
    speed_accel_bloch,
    state_from_angles,
    state_from_bloch,
    torsion_bloch,
)
from quantum_frenet.rabi import RabiParams, bloch_exact, exact_states, rabi_field, rabi_schedule

coordinates = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
vectors = st.tuples(coordinates, coordinates, coordinates).map(np.array)


def _unit(v):
    return v / np.linalg.norm(v)


@st.composite
def qubit_points(draw):
    """Unit a, field m with 0.5 <= |m| <= 2 and |ṁ| <= 2, speed above 1e-3."""
    a, m, mdot = draw(vectors), draw(vectors), draw(vectors)
    assume(np.linalg.norm(a) > 0.1 and np.linalg.norm(m) > 0.1)
    a = _unit(a)
    m = _unit(m) * draw(st.floats(min_value=0.5, max_value=2.0))
    mdot = 2 * mdot / max(1.0, np.linalg.norm(mdot))
    assume(np.linalg.norm(np.cross(a, m)) > 1e-3)
    return a, m, mdot


@given(st.floats(0.0, math.pi), st.floats(0.0, 2 * math.pi, exclude_max=True))
def test_bloch_round_trip_through_angles(theta, phi):
    state = state_from_angles(theta, phi)
    a = bloch_from_state(state)
    np.testing.assert_allclose(a, bloch_from_angles(theta, phi), atol=1e-12)
    overlap = abs(np.vdot(state_from_bloch(a), state))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_state_from_bloch_rejects_non_unit_vector():
    with pytest.raises(NotNormalizedError):
        state_from_bloch(np.array([0.0, 0.0, 0.5]))


def test_bloch_from_state_needs_a_qubit():
    with pytest.raises(DimensionUnsupportedError):
        bloch_from_state(np.ones(3) / math.sqrt(3))


def test_field_vector_validates_shape():
    with pytest.raises(InvalidInputError):
        FieldVector(np.zeros(2), np.zeros(3))


@given(qubit_points())
def test_bloch_dynamics_matches_schrodinger_equation(point):
    a, m, _ = point
    state = state_from_bloch(a)
    h = field_operator(m)
    # ∂t a_k = ⟨ψ|i[H, σ_k]|ψ⟩
    derivative = bloch_from_state(state - 1e-6j * h @ state) - bloch_from_state(state + 1e-6j * h @ state)
    np.testing.assert_allclose(derivative / 2e-6, bloch_rhs(m, a), atol=1e-6)


@given(qubit_points())
def test_curvature_closed_form_matches_expectation_route(point):
    a, m, mdot = point
    closed = curvature_bloch(a, m, mdot)
    matrix = curvature_expectation(field_operator(m), field_operator(mdot), state_from_bloch(a))
    assert closed == pytest.approx(matrix, abs=1e-10 * max(1.0, closed, curvature_scale(a, m, mdot)))


@given(qubit_points())
def test_qubit_torsion_vanishes(point):
    a, m, mdot = point
    torsion = torsion_bloch(a, m, mdot)
    assert torsion.residual <= 1e-12 * max(1.0, torsion.magnitude)
    assert torsion.bend_term == pytest.approx(torsion.twist_term, abs=1e-12 * max(1.0, torsion.magnitude))
    state = state_from_bloch(a)
    assert abs(torsion_expectation(field_operator(m), field_operator(mdot), state)) < 1e-8
    assert abs(torsion_generalized_variance(field_operator(m), field_operator(mdot), state)) < 1e-10


def test_curvature_is_a_perfect_square():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = _unit(rng.normal(size=3))
        m, mdot = rng.normal(size=3), rng.normal(size=3)
        v2 = m @ m - (a @ m) ** 2
        if v2 < 0.25:
            continue
        expected = (2 * (a @ m) * v2 + a @ np.cross(m, mdot)) ** 2 / v2 ** 3
        magnitude = np.sum(np.cross(m, mdot) ** 2) / v2 ** 3 + 4 * (a @ m) ** 2 / v2
        assert curvature_bloch(a, m, mdot) == pytest.approx(expected, abs=1e-12 * max(1.0, magnitude))


def test_static_field_curvature():
    # A circle of latitude: κ² = 4(a·m)²/v²
    a = np.array([math.sqrt(0.5), 0.0, math.sqrt(0.5)])
    m = np.array([0.0, 0.0, 1.0])
    assert curvature_bloch(a, m, np.zeros(3)) == pytest.approx(4.0)
    motion = speed_accel_bloch(a, m, np.zeros(3))
    assert motion.v == pytest.approx(math.sqrt(0.5))
    assert motion.v_dot == pytest.approx(0.0)


def test_great_circle_is_a_geodesic():
    a = np.array([1.0, 0.0, 0.0])
    m = np.array([0.0, 0.0, 0.7])
    assert curvature_bloch(a, m, np.zeros(3)) == pytest.approx(0.0, abs=1e-15)


def test_field_aligned_with_bloch_vector_is_degenerate():
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(DegenerateSpeedError):
        curvature_bloch(a, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    kappa2, tau2 = bloch_route(np.stack([a, [1.0, 0.0, 0.0]]),
                               np.array([[0.0, 0.0, 1.0]] * 2), np.zeros((2, 3)))
    assert np.isnan(kappa2[0]) and np.isnan(tau2[0])
    assert kappa2[1] == pytest.approx(0.0, abs=1e-15)


@given(qubit_points())
def test_speed_matches_hamiltonian_dispersion(point):
    a, m, mdot = point
    state = state_from_bloch(a)
    h = field_operator(m)
    shifted = h @ state - np.vdot(state, h @ state) * state
    variance = np.sum(np.abs(shifted) ** 2)
    assert speed_accel_bloch(a, m, mdot).v == pytest.approx(math.sqrt(variance), rel=1e-10)


def test_propagate_bloch_matches_state_propagation():
    params = RabiParams(1.0, 1.0, 0.9)
    grid = TimeGrid(10.0, 2000)
    schedule = rabi_schedule(params, grid.t_max)
    a0 = np.array([0.0, 0.0, -1.0])
    orbit = propagate_bloch(schedule, a0, grid)
    states = propagate(schedule, state_from_bloch(a0), grid).raw_states
    np.testing.assert_allclose(orbit, bloch_from_state(states), atol=1e-8)
    np.testing.assert_allclose(np.linalg.norm(orbit, axis=-1), 1.0, atol=1e-14)


def test_field_schedule_builds_hamiltonians():
    schedule = FieldSchedule(
        lambda t: FieldVector(np.array([math.cos(t), 0.0, 0.5]), np.array([-math.sin(t), 0.0, 0.0])),
        t_max=5.0,
    )
    fields = schedule.field_many(np.array([0.0, 1.0]))
    assert fields.m.shape == (2, 3)
    np.testing.assert_allclose(schedule.evaluate(1.0), field_operator(fields.m[1]))
    np.testing.assert_allclose(schedule.derivative(1.0), field_operator(fields.mdot[1]))


def test_slow_draws_keep_the_routes_equivalent():
    speeds = []
    for draw in qubit_draws(np.random.default_rng(11), 1000):
        h, hdot = field_operator(draw.m), field_operator(draw.mdot)
        state = state_from_bloch(draw.a)
        closed = curvature_bloch(draw.a, draw.m, draw.mdot)
        matrix = curvature_expectation(h, hdot, state)
        scale = max(1.0, closed, curvature_scale(draw.a, draw.m, draw.mdot))
        assert closed == pytest.approx(matrix, abs=1e-10 * scale)
        assert abs(torsion_expectation(h, hdot, state)) < 1e-8
        assert abs(torsion_generalized_variance(h, hdot, state)) < 1e-10
        torsion = torsion_bloch(draw.a, draw.m, draw.mdot)
        assert torsion.residual <= 1e-12 * max(1.0, torsion.magnitude)
        speeds.append(speed_accel_bloch(draw.a, draw.m, draw.mdot).v)
    assert 1e-3 < min(speeds) < 1e-2


def test_statistical_terms_of_a_qubit():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a = _unit(rng.normal(size=3))
        m, mdot = rng.normal(size=3), rng.normal(size=3)
        v2 = m @ m - (a @ m) ** 2
        if v2 < 0.25:
            continue
        parts = curvature_statistical(field_operator(m), field_operator(mdot), state_from_bloch(a))
        assert parts.kurtosis_term == pytest.approx(4 * (a @ m) ** 2 / v2, rel=1e-9, abs=1e-12)
        assert parts.comm_sq_term == pytest.approx(-(a @ np.cross(m, mdot)) ** 2 / v2 ** 3, rel=1e-9, abs=1e-12)
        assert parts.comm_sq_term <= 0.0


def test_moment_identity_holds_for_qubits(rng):
    for _ in range(200):
        a = _unit(rng.normal(size=3))
        h, hdot = field_operator(rng.normal(size=3)), field_operator(rng.normal(size=3))
        state = state_from_bloch(a)

        def mean(op):
            return expectation_complex(op, state)

        lhs = mean(h @ h) * mean(hdot @ hdot)
        mixed = mean(hdot) * h - mean(h) * hdot
        rhs = mean(mixed @ mixed) + (abs(mean(anticommutator(h, hdot))) ** 2
                                     + abs(mean(commutator(h, hdot))) ** 2) / 4
        assert lhs == pytest.approx(rhs, abs=1e-10)


@given(qubit_points())
def test_speed_derivative_matches_matrix_form(point):
    a, m, mdot = point
    motion = speed_accel_bloch(a, m, mdot)
    matrix = covariance(field_operator(m), field_operator(mdot), state_from_bloch(a)).real / motion.v
    assert motion.v_dot == pytest.approx(matrix, abs=1e-10 * max(1.0, 1.0 / motion.v))
    # |v̇| is the projection of ṁ's component normal to a onto m's
    assert motion.v_dot ** 2 <= mdot @ mdot - (a @ mdot) ** 2 + 1e-9


def test_speed_derivative_along_a_rabi_orbit():
    params = RabiParams(1.0, 1.0, 0.9)
    a0 = np.array([math.sqrt(0.5), 0.0, -math.sqrt(0.5)])

    def motion(t):
        field = rabi_field(params, t)
        return speed_accel_bloch(bloch_exact(params, a0, t), field.m, field.mdot)

    eps = 1e-5
    for t in (0.3, 1.7, 4.2):
        numeric = (motion(t + eps).v - motion(t - eps).v) / (2 * eps)
        assert motion(t).v_dot == pytest.approx(numeric, rel=1e-6, abs=1e-9)


@given(qubit_points())
def test_bloch_velocity_is_normal_to_field_and_vector(point):
    a, m, _ = point
    adot = bloch_rhs(m, a)
    assert abs(adot @ m) < 1e-14
    assert abs(adot @ a) < 1e-14


def test_complex_covariance_of_rabi_fields():
    params = RabiParams(1.0, 1.0, 0.9)
    state = exact_states(params, state_from_angles(3 * math.pi / 4, 0.0), np.array([0.7]))[0]
    a = bloch_from_state(state)
    field = rabi_field(params, 0.7)
    m, mdot = field.m, field.mdot
    h, hdot = field_operator(m), field_operator(mdot)
    value = expectation_complex(delta_operator(h, state) @ delta_operator(hdot, state), state)
    expected = m @ mdot + 1j * (a @ np.cross(m, mdot)) - (a @ m) * (a @ mdot)
    assert value == pytest.approx(expected, abs=1e-12)


def test_commutator_covariances_sum_to_imaginary_value():
    params = RabiParams(1.0, 1.0, 0.9)
    schedule = rabi_schedule(params, 1.0)
    state = exact_states(params, state_from_angles(3 * math.pi / 4, 0.0), np.array([0.5]))[0]
    h, hdot = schedule.evaluate(0.5), schedule.derivative(0.5)
    comm = commutator(h, hdot)
    total = covariance(h, comm, state) + covariance(comm, h, state)
    assert abs(total.real) < 1e-12
    reference = expectation_complex(anticommutator(h, comm), state) - 2 * expectation_complex(h, state) * \
        expectation_complex(comm, state)
    assert total == pytest.approx(reference, abs=1e-12)
