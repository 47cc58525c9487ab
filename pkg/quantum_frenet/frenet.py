"""
Curvature and torsion coefficients of a quantum curve.

Two independent routes are implemented for any dimension:

- the expectation route assembles κ² and τ² from expectation values of the
  reduced operators Δh = ΔH/v and Δh′ = ΔḢ/v² - ΔH·v̇/v³ at a single point;
- the projector route differentiates the unit tangent |T⟩ = -iΔh|Ψ⟩ along a
  sampled, parallel-transported trajectory and projects the result.

The statistical decomposition rewrites the expectation route in terms of
kurtosis, skewness, variances and covariances of H and Ḣ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .evolution import Trajectory, central_difference, speed_threshold
from .exceptions import (
    DegenerateNormalError,
    DegenerateSpeedError,
    DimensionUnsupportedError,
    InvalidInputError,
)
from .hilbert import (
    apply,
    central_moments,
    check_hermitian,
    check_normalized,
    commutator,
    covariance,
    expectation,
    expectation_complex,
    frobenius_norm,
    generalized_variance,
    i_times,
    identity_like,
    inner,
    variance,
)

logger = logging.getLogger(__name__)

NORMAL_EPS = 1e-12
STENCIL_ORDER = 6
RESIDUE_TOL = 1e-11

Real = Union[float, np.ndarray]


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class _Reduced:
    """Reduced operators applied to the state: x = Δh|ψ⟩, w = Δh²|ψ⟩ and y = Δh′|ψ⟩."""
    state: np.ndarray
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    v: np.ndarray
    v_dot: np.ndarray


def _reduce(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> _Reduced:
    h = check_hermitian(h)
    hdot = check_hermitian(hdot)
    state = np.asarray(state, dtype=complex)
    state = state / np.linalg.norm(state, axis=-1, keepdims=True)
    eye = identity_like(h)
    delta_h = h - np.asarray(expectation(h, state))[..., None, None] * eye
    delta_hdot = hdot - np.asarray(expectation(hdot, state))[..., None, None] * eye
    dh_psi = apply(delta_h, state)
    v = np.linalg.norm(dh_psi, axis=-1)
    if np.any(v <= speed_threshold(h)):
        raise DegenerateSpeedError(
            f"Evolution speed {np.min(v):.3e} is below the degeneracy threshold: "
            "Δh is undefined for an eigenstate"
        )
    dhdot_psi = apply(delta_hdot, state)
    v_dot = np.real(np.asarray(inner(dh_psi, dhdot_psi))) / v
    x = dh_psi / v[..., None]
    w = apply(delta_h, x) / v[..., None]
    y = (dhdot_psi - dh_psi * (v_dot / v)[..., None]) / (v ** 2)[..., None]
    return _Reduced(state=state, x=x, w=w, y=y, v=v, v_dot=v_dot)


def _project_out(vectors: np.ndarray, unit: np.ndarray) -> np.ndarray:
    return vectors - unit * np.asarray(inner(unit, vectors))[..., None]


def _squared_norm(vectors: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(vectors) ** 2, axis=-1)


def _expectation_terms(r: _Reduced, with_torsion: bool):
    # With P the projector off |ψ⟩: ‖Pw‖² = ⟨Δh⁴⟩ - ⟨Δh²⟩², ‖Py‖² = ⟨Δh′²⟩ - ⟨Δh′⟩²
    # and -2 Im⟨Pw|Py⟩ = i⟨[Δh², Δh′]⟩, so κ² = ‖Py - iPw‖².
    w_perp = _project_out(r.w, r.state)
    y_perp = _project_out(r.y, r.state)
    kappa2 = _squared_norm(y_perp - 1j * w_perp)
    if not with_torsion:
        return kappa2, None
    # Removing the unit direction x as well subtracts ⟨Δh³⟩², |⟨ΔhΔh′⟩|² and ⟨Δh³⟩·i⟨[Δh, Δh′]⟩.
    x_perp = _project_out(r.x, r.state)
    x_perp = x_perp / np.linalg.norm(x_perp, axis=-1, keepdims=True)
    tau2 = _squared_norm(_project_out(y_perp, x_perp) - 1j * _project_out(w_perp, x_perp))
    return kappa2, tau2


def curvature_expectation(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> Real:
    """
    κ² = ⟨Δh⁴⟩ - ⟨Δh²⟩² + [⟨Δh′²⟩ - ⟨Δh′⟩²] + i⟨[Δh², Δh′]⟩.

    The three groups are accumulated from the vectors Δh²|ψ⟩ and Δh′|ψ⟩ with
    their |ψ⟩ component removed, so no large expectation values are subtracted.

    Args:
        h: Hamiltonian (stack)
        hdot: Its time derivative (stack)
        state: Normalized state (stack)

    Raises:
        DegenerateSpeedError: If v <= ε_v
    """
    kappa2, _ = _expectation_terms(_reduce(h, hdot, state), with_torsion=False)
    return _out(kappa2)


def torsion_expectation(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> Real:
    """
    τ² = ⟨Δh⁴⟩ - ⟨Δh²⟩² - ⟨Δh³⟩²
         + [⟨Δh′²⟩ - ⟨Δh′⟩² - ⟨Δh′Δh⟩⟨ΔhΔh′⟩]
         + i{⟨[Δh², Δh′]⟩ - ⟨Δh³⟩⟨[Δh, Δh′]⟩}.

    Evaluated as the curvature with the tangent direction Δh|ψ⟩ projected out as
    well; for a qubit nothing is left and the value is zero up to rounding.

    Raises:
        DegenerateSpeedError: If v <= ε_v
    """
    _, tau2 = _expectation_terms(_reduce(h, hdot, state), with_torsion=True)
    return _out(tau2)


def _coefficients(h, hdot, state):
    return _expectation_terms(_reduce(h, hdot, state), with_torsion=True)


@dataclass(frozen=True)
class CurvatureDecomposition:
    """Curvature and torsion split into statistical contributions of H and Ḣ."""
    kurtosis_term: Real
    acceleration_term: Real
    covariance_term: Real
    skew_term: Real
    comm_sq_term: Real
    skew_comm_term: Real
    v: Real
    v_dot: Real
    hdot_variance: Real
    acceleration_bound_ok: Union[bool, np.ndarray]

    @property
    def kappa2(self) -> Real:
        return self.kurtosis_term + self.acceleration_term + self.covariance_term

    @property
    def tau2(self) -> Real:
        return (self.kurtosis_term + self.skew_term + self.acceleration_term
                + self.comm_sq_term + self.covariance_term + self.skew_comm_term)


def curvature_statistical(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> CurvatureDecomposition:
    """
    Statistical form of the curvature and torsion coefficients.

    κ² = (α₄ - 1) + [σ²_Ḣ - v̇²]/v⁴ + i[cov(H, C) + cov(C, H)]/v⁴
    τ² = κ² - α₃² + ⟨C⟩²/(4v⁶) - iα₃⟨C⟩/v³
    with C = [H, Ḣ].

    Raises:
        DegenerateSpeedError: If v <= ε_v
        DegenerateDispersionError: If the skewness or kurtosis is undefined
    """
    h = check_hermitian(h)
    hdot = check_hermitian(hdot)
    state = np.asarray(state, dtype=complex)
    r = _reduce(h, hdot, state)
    moments = central_moments(h, state, up_to=4)
    v = r.v
    v_dot = r.v_dot
    hdot_variance = np.asarray(variance(hdot, state))

    comm = commutator(h, hdot)
    scale = np.maximum(1.0, frobenius_norm(h) ** 2 * frobenius_norm(hdot))
    cov_sum = np.asarray(covariance(h, comm, state)) + np.asarray(covariance(comm, h, state))
    mean_comm = i_times(expectation_complex(comm, state), scale=scale,
                        what="i⟨[H, Ḣ]⟩", tol=RESIDUE_TOL)
    mean_comm = np.asarray(mean_comm)
    alpha3 = np.asarray(moments.skewness)
    alpha4 = np.asarray(moments.kurtosis)

    covariance_term = np.asarray(i_times(cov_sum, scale=scale * frobenius_norm(h),
                                         what="i[cov(H, C) + cov(C, H)]", tol=RESIDUE_TOL)) / v ** 4
    bound_ok = v_dot ** 2 <= hdot_variance + 1e-10 * np.maximum(1.0, hdot_variance)
    return CurvatureDecomposition(
        kurtosis_term=_out(alpha4 - 1),
        acceleration_term=_out((hdot_variance - v_dot ** 2) / v ** 4),
        covariance_term=_out(covariance_term),
        skew_term=_out(-alpha3 ** 2),
        # ⟨C⟩ = -i·mean_comm, so ⟨C⟩² = -mean_comm²
        comm_sq_term=_out(-mean_comm ** 2 / (4 * v ** 6)),
        skew_comm_term=_out(-alpha3 * mean_comm / v ** 3),
        v=_out(v),
        v_dot=_out(v_dot),
        hdot_variance=_out(hdot_variance),
        acceleration_bound_ok=bool(bound_ok) if np.ndim(bound_ok) == 0 else bound_ok,
    )


def torsion_generalized_variance(h: np.ndarray, hdot: np.ndarray, state: np.ndarray) -> Real:
    """
    Qubit torsion as det Σ(H, Ḣ)/v⁶.

    Raises:
        DimensionUnsupportedError: If the Hilbert space is not two-dimensional
        DegenerateSpeedError: If v <= ε_v
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] != 2:
        raise DimensionUnsupportedError(
            f"The generalized-variance form of the torsion holds for qubits only, got N={h.shape[-1]}"
        )
    r = _reduce(h, hdot, state)
    sigma = generalized_variance(h, hdot, state)
    return _out(np.asarray(sigma.determinant) / r.v ** 6)


@dataclass(frozen=True)
class ProjectorVectors:
    """Tangent, projected derivative Ñ* = P_Ψ|T′⟩ and Ñ = P_T P_Ψ|T′⟩ along a trajectory."""
    tangent: np.ndarray
    normal_star: np.ndarray
    normal: np.ndarray


def projector_vectors(trajectory: Trajectory, strict: bool = True) -> ProjectorVectors:
    """
    Finite-difference construction of the projected derivatives of |T⟩.

    |T′⟩ = v⁻¹·∂_t|T⟩ uses the 6th-order central stencil, so the first three and
    last three rows are NaN. With ``strict`` a degenerate speed anywhere raises;
    otherwise the affected rows (and their stencil neighbours) are NaN.
    """
    if len(trajectory) < STENCIL_ORDER + 1:
        raise InvalidInputError(
            f"The projector route needs at least {STENCIL_ORDER + 1} samples, got {len(trajectory)}"
        )
    psi = trajectory.transported_states
    hams = trajectory.hamiltonians
    v = trajectory.speed
    degenerate = v <= speed_threshold(hams)
    if strict and np.any(degenerate):
        raise DegenerateSpeedError(
            f"Evolution speed vanishes at t={trajectory.times[np.argmax(degenerate)]:.6g}"
        )
    safe_v = np.where(degenerate, 1.0, v)
    mean = np.asarray(expectation(hams, psi))
    delta_h = hams - mean[:, None, None] * identity_like(hams)
    tangent = -1j * apply(delta_h, psi) / safe_v[:, None]
    tangent[degenerate] = np.nan
    t_prime = central_difference(tangent, trajectory.dt, order=STENCIL_ORDER) / safe_v[:, None]
    normal_star = t_prime - psi * np.asarray(inner(psi, t_prime))[:, None]
    normal = normal_star - tangent * np.asarray(inner(tangent, normal_star))[:, None]
    return ProjectorVectors(tangent=tangent, normal_star=normal_star, normal=normal)


def curvature_projector(trajectory: Trajectory, schedule=None) -> np.ndarray:
    """κ² = ⟨Ñ*|Ñ*⟩ along the trajectory; NaN at the stencil endpoints."""
    return _squared_norm(projector_vectors(trajectory).normal_star)


def torsion_projector(trajectory: Trajectory, schedule=None) -> np.ndarray:
    """τ² = ⟨Ñ|Ñ⟩ along the trajectory; NaN at the stencil endpoints."""
    return _squared_norm(projector_vectors(trajectory).normal)


def projector_route(trajectory: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """(κ², τ²) by the projector route, NaN wherever the stencil touches a degenerate point."""
    vectors = projector_vectors(trajectory, strict=False)
    return _squared_norm(vectors.normal_star), _squared_norm(vectors.normal)


def expectation_route(trajectory: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """(κ², τ²) by the expectation route at every regular grid point, NaN elsewhere."""
    hams = trajectory.hamiltonians
    regular = trajectory.speed > speed_threshold(hams)
    kappa2 = np.full(len(trajectory), np.nan)
    tau2 = np.full(len(trajectory), np.nan)
    if np.any(regular):
        k, t = _coefficients(hams[regular], trajectory.hamiltonian_derivatives[regular],
                             trajectory.transported_states[regular])
        kappa2[regular] = k
        tau2[regular] = t
    return kappa2, tau2


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal triple {Ψ, T, N}."""
    state: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray

    def gram(self) -> np.ndarray:
        basis = np.stack([self.state, self.tangent, self.normal])
        return np.conj(basis) @ basis.T


def frenet_frame(state: np.ndarray, tangent: np.ndarray, normal_tilde: np.ndarray) -> FrenetFrame:
    """
    Normalize Ñ into the unit normal N.

    Raises:
        DegenerateNormalError: If ⟨Ñ|Ñ⟩ <= 1e-12 (the curve is locally geodesic)
    """
    normal_tilde = np.asarray(normal_tilde, dtype=complex)
    norm2 = float(np.sum(np.abs(normal_tilde) ** 2))
    if not np.isfinite(norm2) or norm2 <= NORMAL_EPS:
        raise DegenerateNormalError(
            f"Normal direction is undefined: ⟨Ñ|Ñ⟩ = {norm2:.3e} (the curve is locally geodesic)"
        )
    return FrenetFrame(
        state=np.asarray(state, dtype=complex),
        tangent=np.asarray(tangent, dtype=complex),
        normal=normal_tilde / np.sqrt(norm2),
    )


@dataclass(frozen=True)
class FrenetSample:
    """Curvature and torsion at one grid point, keyed by route name."""
    t: float
    s: float
    v: float
    v_dot: float
    kappa2: Mapping[str, float]
    tau2: Mapping[str, float]
    frame: Optional[FrenetFrame] = None
    decomposition: Optional[CurvatureDecomposition] = None


def frenet_samples(
    trajectory: Trajectory,
    kappa2: Mapping[str, np.ndarray],
    tau2: Mapping[str, np.ndarray],
    *,
    with_frames: bool = False,
    decompose_at: Sequence[int] = (),
) -> list[FrenetSample]:
    """
    Assemble per-point records from route arrays.

    Args:
        trajectory: The sampled curve
        kappa2: Route name -> κ² array over the grid
        tau2: Route name -> τ² array over the grid
        with_frames: Attach the Frenet frame wherever the normal is defined
        decompose_at: Grid indices at which to attach the statistical decomposition
    """
    vectors = projector_vectors(trajectory, strict=False) if with_frames else None
    decompose_at = set(decompose_at)
    samples = []
    for i, t in enumerate(trajectory.times):
        frame = None
        if vectors is not None:
            try:
                frame = frenet_frame(trajectory.transported_states[i], vectors.tangent[i], vectors.normal[i])
            except DegenerateNormalError:
                frame = None
        decomposition = None
        if i in decompose_at:
            decomposition = curvature_statistical(
                trajectory.hamiltonians[i], trajectory.hamiltonian_derivatives[i],
                trajectory.transported_states[i],
            )
        samples.append(FrenetSample(
            t=float(t),
            s=float(trajectory.arc_length[i]),
            v=float(trajectory.speed[i]),
            v_dot=float(trajectory.v_dot[i]),
            kappa2={route: float(values[i]) for route, values in kappa2.items()},
            tau2={route: float(values[i]) for route, values in tau2.items()},
            frame=frame,
            decomposition=decomposition,
        ))
    return samples


def stationary_collapse(h: np.ndarray, state: np.ndarray) -> tuple[Real, Real]:
    """(κ², τ²) of a stationary Hamiltonian evaluated through the time-dependent formulas."""
    h = np.asarray(h, dtype=complex)
    state = check_normalized(np.asarray(state, dtype=complex))
    kappa2, tau2 = _coefficients(h, np.zeros_like(h), state)
    return _out(kappa2), _out(tau2)


def route_gap(first: np.ndarray, second: np.ndarray) -> float:
    """Largest absolute difference between two route arrays over points where both are defined."""
    both = np.isfinite(first) & np.isfinite(second)
    if not np.any(both):
        return float("nan")
    return float(np.max(np.abs(np.asarray(first)[both] - np.asarray(second)[both])))
