import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quantum_frenet.evolution import TimeGrid
from quantum_frenet.exceptions import InvalidInputError, NotNormalizedError
from quantum_frenet.qubit import bloch_from_state, propagate_bloch, state_from_bloch
from quantum_frenet.rabi import (
    NEAR_RESONANCE,
    OFF_RESONANCE,
    ON_RESONANCE,
    STRONG_DRIVING,
    WEAK_DRIVING,
    AxisAngle,
    RabiParams,
    bloch_exact,
    classify_regime,
    compose_rotations,
    exact_states,
    rabi_axis_angle,
    rabi_hamiltonian,
    rabi_hamiltonian_rotating,
    rabi_propagator,
    rabi_schedule,
    rotating_frame_hamiltonian,
    su2_matrix,
    tan2_half_angle,
)

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
WEAK = RabiParams(1.0, 0.1, 0.9)
STRONG = RabiParams(1.0, 1.0, 0.9)

angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)
axes = st.tuples(*[st.floats(-1.0, 1.0, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 0.1
).map(lambda v: np.array(v) / np.linalg.norm(v))


def test_params_derived_quantities():
    assert STRONG.Delta == pytest.approx(0.1)
    assert STRONG.Omega == pytest.approx(math.sqrt(1.0 + 0.0025))
    assert STRONG.Omega_H == pytest.approx(math.sqrt(1.25))
    np.testing.assert_allclose(STRONG.rotating_axis, np.array([1.0, 0.0, 0.05]) / STRONG.Omega)
    assert np.linalg.norm(STRONG.rotating_axis) == pytest.approx(1.0)


def test_params_without_rabi_frequency():
    params = RabiParams(0.9, 0.0, 0.9)
    assert params.Omega == 0.0
    assert params.delta_ratio == math.inf
    np.testing.assert_array_equal(params.rotating_axis, Z_AXIS)


@pytest.mark.parametrize("value", [math.nan, math.inf, "1.0"])
def test_params_reject_bad_values(value):
    with pytest.raises(InvalidInputError):
        RabiParams(1.0, value, 0.9)


def test_with_value():
    assert WEAK.with_value("Omega0", 1.0) == STRONG
    with pytest.raises(InvalidInputError):
        WEAK.with_value("chi", 1.0)


def test_axis_angle_needs_unit_axis():
    with pytest.raises(NotNormalizedError):
        AxisAngle(1.0, np.array([1.0, 1.0, 0.0]))


@pytest.mark.parametrize("first, second, angle, axis", [
    ((math.pi, Z_AXIS), (0.0, X_AXIS), math.pi, Z_AXIS),
    ((math.pi / 2, Z_AXIS), (math.pi / 2, Z_AXIS), math.pi, Z_AXIS),
    ((math.pi / 2, Z_AXIS), (math.pi / 2, X_AXIS), 2 * math.pi / 3, np.ones(3) / math.sqrt(3)),
])
def test_compose_rotations_worked_cases(first, second, angle, axis):
    result = compose_rotations(AxisAngle(*first), AxisAngle(*second))
    assert result.angle == pytest.approx(angle, abs=1e-12)
    np.testing.assert_allclose(result.axis, axis, atol=1e-12)


@given(angles, axes, angles, axes)
def test_composition_matches_su2_product(angle1, axis1, angle2, axis2):
    r1, r2 = AxisAngle(angle1, axis1), AxisAngle(angle2, axis2)
    result = compose_rotations(r1, r2)
    assert 0.0 <= result.angle <= 2 * math.pi
    np.testing.assert_allclose(result.matrix(), r1.matrix() @ r2.matrix(), atol=1e-12)


def test_composed_rotation_acts_on_bloch_vectors(rng):
    r1 = AxisAngle(0.7, np.array([0.0, 0.6, 0.8]))
    r2 = AxisAngle(-1.3, X_AXIS)
    a0 = np.array([0.0, 0.0, -1.0])
    np.testing.assert_allclose(compose_rotations(r1, r2).rotate(a0), r1.rotate(r2.rotate(a0)), atol=1e-12)


def test_propagator_is_unitary():
    times = np.linspace(0.0, 30.0, 61)
    u = rabi_propagator(STRONG, times)
    product = np.conj(np.swapaxes(u, -1, -2)) @ u
    assert np.max(np.abs(product - np.eye(2))) < 1e-12
    np.testing.assert_allclose(u[0], np.eye(2), atol=1e-15)


@pytest.mark.parametrize("params", [WEAK, STRONG, RabiParams(1.0, 0.0, 0.9)])
def test_propagator_solves_schrodinger_equation(params):
    h = 1e-4
    for t in (0.3, 2.0, 7.5):
        derivative = 1j * (rabi_propagator(params, t + h) - rabi_propagator(params, t - h)) / (2 * h)
        expected = rabi_hamiltonian(params, t) @ rabi_propagator(params, t)
        assert np.max(np.abs(derivative - expected)) < 1e-6


def test_free_atom_propagator():
    params = RabiParams(1.0, 0.0, 0.9)
    t = 2.5
    expected = np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])
    np.testing.assert_allclose(rabi_propagator(params, t), expected, atol=1e-12)


def test_rotating_frame_hamiltonian_is_static():
    expected = rabi_hamiltonian_rotating(STRONG)
    for t in (0.0, 1.7, 12.0):
        np.testing.assert_allclose(rotating_frame_hamiltonian(STRONG, t), expected, atol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 4.2, 17.0])
def test_axis_angle_reconstructs_propagator(t):
    rotation = rabi_axis_angle(STRONG, t)
    np.testing.assert_allclose(su2_matrix(rotation), rabi_propagator(STRONG, t), atol=1e-12)


def test_axis_angle_at_time_zero():
    rotation = rabi_axis_angle(STRONG, 0.0)
    assert rotation.angle == 0.0
    np.testing.assert_array_equal(rotation.axis, Z_AXIS)


def test_axis_angle_without_driving():
    # Ω₀ = 0 leaves a pure precession about ẑ at the atomic frequency
    params = RabiParams(1.0, 0.0, 0.9)
    rotation = rabi_axis_angle(params, 2.0)
    assert rotation.angle == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(rotation.axis, Z_AXIS, atol=1e-12)


def test_axis_angle_without_driving_past_one_turn():
    params = RabiParams(1.0, 0.0, 0.9)
    t = 3 * math.pi
    rotation = rabi_axis_angle(params, t)
    assert rotation.angle == pytest.approx(4 * math.pi - params.omega0 * t, abs=1e-12)
    np.testing.assert_allclose(rotation.axis, -Z_AXIS, atol=1e-12)
    np.testing.assert_allclose(su2_matrix(rotation), rabi_propagator(params, t), atol=1e-12)


@pytest.mark.parametrize("params", [WEAK, STRONG])
def test_tan2_half_angle_matches_composition(params):
    for t in np.linspace(0.1, 20.0, 40):
        rotation = rabi_axis_angle(params, t)
        cos_half = math.cos(rotation.angle / 2)
        if abs(cos_half) < 1e-3:
            continue
        expected = math.tan(rotation.angle / 2) ** 2
        assert tan2_half_angle(params, t) == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_bloch_exact_matches_state_propagation():
    a0 = np.array([0.0, 0.0, -1.0])
    times = np.linspace(0.0, 20.0, 101)
    orbit = bloch_exact(STRONG, a0, times)
    states = exact_states(STRONG, state_from_bloch(a0), times)
    np.testing.assert_allclose(orbit, bloch_from_state(states), atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(orbit, axis=-1), 1.0, atol=1e-12)
    np.testing.assert_allclose(orbit[0], a0, atol=1e-15)


def test_bloch_exact_free_precession():
    params = RabiParams(1.0, 0.0, 0.9)
    times = np.linspace(0.0, 10.0, 11)
    orbit = bloch_exact(params, X_AXIS, times)
    expected = np.stack([np.cos(times), np.sin(times), np.zeros_like(times)], axis=-1)
    np.testing.assert_allclose(orbit, expected, atol=1e-12)


@pytest.mark.parametrize("params", [WEAK, STRONG])
def test_bloch_exact_matches_ode(params):
    grid = TimeGrid(50.0, 10000)
    a0 = np.array([0.0, 0.0, -1.0])
    orbit = propagate_bloch(rabi_schedule(params, grid.t_max), a0, grid)
    assert np.max(np.linalg.norm(orbit - bloch_exact(params, a0, grid.times), axis=-1)) < 1e-6


def test_bloch_exact_rejects_non_unit_vector():
    with pytest.raises(NotNormalizedError):
        bloch_exact(STRONG, np.array([0.0, 0.0, 2.0]), 1.0)


@pytest.mark.parametrize("params, labels", [
    (RabiParams(1.0, 0.1, 0.9), {NEAR_RESONANCE, WEAK_DRIVING}),
    (RabiParams(1.0, 1.0, 0.9), {NEAR_RESONANCE}),
    (RabiParams(1.0, 0.01, 5.0), {OFF_RESONANCE, WEAK_DRIVING}),
    (RabiParams(1.0, 0.1, 1.0), {ON_RESONANCE, WEAK_DRIVING}),
    (RabiParams(0.05, 1.0, 0.05), {ON_RESONANCE, STRONG_DRIVING}),
])
def test_classify_regime(params, labels):
    assert classify_regime(params) == frozenset(labels)
