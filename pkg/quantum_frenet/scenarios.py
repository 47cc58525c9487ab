"""
Scenario configuration: JSON parsing, validation and the shipped schedules.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .evolution import METHODS as INTEGRATORS
from .evolution import HamiltonianSchedule, TimeGrid
from .exceptions import InvalidConfigError, InvalidInputError
from .hilbert import spin_matrices
from .qubit import FieldSchedule, FieldVector, state_from_angles
from .rabi import RabiParams, rabi_schedule
from .utils import get_nested_value

logger = logging.getLogger(__name__)

SCENARIOS = ("rabi", "custom_qubit", "qutrit_demo")
ROUTES = ("bloch", "expectation", "projector", "exact")
OUTPUTS = ("csv", "svg")
MIN_STEPS = 16
AMPLITUDE_NORM_TOL = 1e-12

REQUIRED_PARAMS = {
    "rabi": ("omega0", "Omega0", "omega"),
    "custom_qubit": ("mx", "my", "mz"),
    "qutrit_demo": ("omega0", "Omega0", "omega"),
}
OPTIONAL_PARAMS = {
    "rabi": {},
    "custom_qubit": {"cx": 0.0, "cy": 0.0, "cz": 0.0, "sx": 0.0, "sy": 0.0, "sz": 0.0, "omega": 0.0},
    "qutrit_demo": {"chi": 0.3},
}
QUBIT_SCENARIOS = ("rabi", "custom_qubit")


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario: what to simulate, on which grid, by which routes."""
    scenario: str
    params: Mapping[str, float]
    grid: TimeGrid
    initial_state: Mapping[str, Any]
    methods: tuple = ()
    outputs: tuple = OUTPUTS
    integrator: str = "rk4"
    label: str = ""
    source: Optional[Path] = field(default=None, compare=False)

    @property
    def is_qubit(self) -> bool:
        return self.scenario in QUBIT_SCENARIOS

    @property
    def dimension(self) -> int:
        return 2 if self.is_qubit else 3

    def with_param(self, name: str, value: float) -> "ScenarioConfig":
        """Copy of the config with one scenario parameter replaced."""
        allowed = REQUIRED_PARAMS[self.scenario] + tuple(OPTIONAL_PARAMS[self.scenario])
        if name not in allowed:
            raise InvalidConfigError(
                f"params.{name}: not a parameter of scenario '{self.scenario}' "
                f"(expected one of {', '.join(allowed)})"
            )
        params = dict(self.params)
        params[name] = _number(value, f"params.{name}")
        return dataclasses.replace(self, params=params)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "label": self.label,
            "params": dict(self.params),
            "initial_state": dict(self.initial_state),
            "grid": {"t_max": self.grid.t_max, "steps": self.grid.steps},
            "methods": list(self.methods),
            "outputs": list(self.outputs),
            "integrator": self.integrator,
        }


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidConfigError(f"{key}: expected a finite number, got {value!r}")
    return float(value)


def _string_list(value: Any, key: str, allowed: tuple) -> tuple:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise InvalidConfigError(f"{key}: expected a list of strings, got {value!r}")
    unknown = [v for v in value if v not in allowed]
    if unknown:
        raise InvalidConfigError(f"{key}: unknown entries {unknown}, expected a subset of {list(allowed)}")
    if not value:
        raise InvalidConfigError(f"{key}: must not be empty")
    # Keep the canonical order and drop duplicates
    return tuple(v for v in allowed if v in value)


def load_config(path: Path) -> ScenarioConfig:
    """
    Read and validate a scenario JSON file.

    Raises:
        InvalidConfigError: If the file is missing, not JSON, or violates the schema
    """
    path = Path(path)
    if not path.exists():
        raise InvalidConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"Invalid JSON format in {path}: {e}")
    except OSError as e:
        raise InvalidConfigError(f"Failed to read config file {path}: {e}")
    return dataclasses.replace(parse_config(data), source=path)


def parse_config(data: Any) -> ScenarioConfig:
    """
    Validate a decoded JSON document into a ScenarioConfig.

    Raises:
        InvalidConfigError: Naming the offending key path
    """
    if not isinstance(data, dict):
        raise InvalidConfigError("Config must be a JSON object")

    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        raise InvalidConfigError(f"scenario: expected one of {list(SCENARIOS)}, got {scenario!r}")

    raw_params = get_nested_value(data, "params", default={})
    if not isinstance(raw_params, dict):
        raise InvalidConfigError("params: expected an object")
    allowed = REQUIRED_PARAMS[scenario] + tuple(OPTIONAL_PARAMS[scenario])
    unknown = sorted(set(raw_params) - set(allowed))
    if unknown:
        raise InvalidConfigError(
            f"params.{unknown[0]}: not a parameter of scenario '{scenario}' (expected {', '.join(allowed)})"
        )
    params = {}
    for key in REQUIRED_PARAMS[scenario]:
        if key not in raw_params:
            raise InvalidConfigError(f"params.{key}: required for scenario '{scenario}'")
        params[key] = _number(raw_params[key], f"params.{key}")
    for key, default in OPTIONAL_PARAMS[scenario].items():
        params[key] = _number(raw_params.get(key, default), f"params.{key}")

    if not isinstance(data.get("grid"), dict):
        raise InvalidConfigError("grid: expected an object with 't_max' and 'steps'")
    t_max = _number(get_nested_value(data, "grid", "t_max"), "grid.t_max")
    if t_max <= 0:
        raise InvalidConfigError(f"grid.t_max: must be > 0, got {t_max}")
    steps = get_nested_value(data, "grid", "steps")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < MIN_STEPS:
        raise InvalidConfigError(f"grid.steps: expected an integer >= {MIN_STEPS}, got {steps!r}")
    try:
        grid = TimeGrid(t_max, steps)
    except InvalidInputError as e:
        raise InvalidConfigError(f"grid: {e}")

    initial_state = _parse_initial_state(scenario, get_nested_value(data, "initial_state", default={}))

    valid_routes = tuple(
        r for r in ROUTES
        if (r != "exact" or scenario == "rabi") and (r != "bloch" or scenario in QUBIT_SCENARIOS)
    )
    methods = data.get("methods")
    if methods is None:
        methods = tuple(r for r in valid_routes if r != "exact")
    else:
        methods = _string_list(methods, "methods", ROUTES)
        invalid = [m for m in methods if m not in valid_routes]
        if invalid:
            raise InvalidConfigError(
                f"methods: {invalid} not available for scenario '{scenario}' "
                "('exact' needs rabi, 'bloch' needs a qubit scenario)"
            )

    outputs = data.get("outputs")
    outputs = OUTPUTS if outputs is None else _string_list(outputs, "outputs", OUTPUTS)

    integrator = data.get("integrator", "rk4")
    if integrator not in INTEGRATORS:
        raise InvalidConfigError(f"integrator: expected one of {list(INTEGRATORS)}, got {integrator!r}")

    label = data.get("label", "")
    if not isinstance(label, str):
        raise InvalidConfigError(f"label: expected a string, got {label!r}")

    return ScenarioConfig(
        scenario=scenario, params=params, grid=grid, initial_state=initial_state,
        methods=methods, outputs=outputs, integrator=integrator, label=label,
    )


def _parse_initial_state(scenario: str, raw: Any) -> dict:
    if not isinstance(raw, dict):
        raise InvalidConfigError("initial_state: expected an object")
    if scenario in QUBIT_SCENARIOS:
        if "amplitudes" in raw:
            raise InvalidConfigError("initial_state.amplitudes: qubit scenarios take 'theta' and 'phi'")
        for key in ("theta", "phi"):
            if key not in raw:
                raise InvalidConfigError(f"initial_state.{key}: required for qubit scenarios")
        theta = _number(raw["theta"], "initial_state.theta")
        phi = _number(raw["phi"], "initial_state.phi")
        if not 0.0 <= theta <= math.pi:
            raise InvalidConfigError(f"initial_state.theta: must lie in [0, π], got {theta}")
        if not 0.0 <= phi < 2 * math.pi:
            raise InvalidConfigError(f"initial_state.phi: must lie in [0, 2π), got {phi}")
        return {"theta": theta, "phi": phi}

    amplitudes = raw.get("amplitudes")
    if amplitudes is None:
        return {"amplitudes": [[1 / math.sqrt(3), 0.0]] * 3}
    if not isinstance(amplitudes, list) or len(amplitudes) != 3:
        raise InvalidConfigError("initial_state.amplitudes: expected a list of 3 amplitudes")
    parsed = []
    for i, amp in enumerate(amplitudes):
        key = f"initial_state.amplitudes[{i}]"
        if isinstance(amp, list):
            if len(amp) != 2:
                raise InvalidConfigError(f"{key}: expected a number or a [re, im] pair")
            parsed.append([_number(amp[0], key), _number(amp[1], key)])
        else:
            parsed.append([_number(amp, key), 0.0])
    norm = math.sqrt(sum(re * re + im * im for re, im in parsed))
    if norm == 0:
        raise InvalidConfigError("initial_state.amplitudes: the zero vector is not a state")
    if abs(norm - 1.0) > AMPLITUDE_NORM_TOL:
        logger.warning("Initial amplitudes have norm %.15g, renormalizing", norm)
    return {"amplitudes": [[re / norm, im / norm] for re, im in parsed]}


def rabi_params(config: ScenarioConfig) -> Optional[RabiParams]:
    if config.scenario != "rabi":
        return None
    return RabiParams(config.params["omega0"], config.params["Omega0"], config.params["omega"])


def custom_field(params: Mapping[str, float]):
    """Field callback m(t) = m + c·cos(ωt) + s·sin(ωt) with its analytic derivative."""
    m = np.array([params["mx"], params["my"], params["mz"]])
    c = np.array([params.get("cx", 0.0), params.get("cy", 0.0), params.get("cz", 0.0)])
    s = np.array([params.get("sx", 0.0), params.get("sy", 0.0), params.get("sz", 0.0)])
    omega = params.get("omega", 0.0)

    def field_at(t: float) -> FieldVector:
        cos, sin = math.cos(omega * t), math.sin(omega * t)
        return FieldVector(m + c * cos + s * sin, omega * (s * cos - c * sin))

    return field_at


def qutrit_schedule(omega0: float, Omega0: float, omega: float, chi: float = 0.3,
                    t_max: float = 1.0) -> HamiltonianSchedule:
    """Spin-1 schedule H(t) = ω₀J_z + χJ_z² + Ω₀[cos(ωt)J_x + sin(ωt)J_y]."""
    j_x, j_y, j_z = spin_matrices(1)
    static = omega0 * j_z + chi * (j_z @ j_z)

    def hamiltonian(t: float) -> np.ndarray:
        return static + Omega0 * (math.cos(omega * t) * j_x + math.sin(omega * t) * j_y)

    def derivative(t: float) -> np.ndarray:
        return Omega0 * omega * (-math.sin(omega * t) * j_x + math.cos(omega * t) * j_y)

    label = f"qutrit(omega0={omega0:g}, Omega0={Omega0:g}, omega={omega:g}, chi={chi:g})"
    return HamiltonianSchedule(3, hamiltonian, derivative, label=label, t_max=t_max)


def build_schedule(config: ScenarioConfig) -> HamiltonianSchedule:
    """The Hamiltonian schedule a config describes."""
    t_max = config.grid.t_max
    if config.scenario == "rabi":
        return rabi_schedule(rabi_params(config), t_max=t_max)
    if config.scenario == "custom_qubit":
        return FieldSchedule(custom_field(config.params), label=config.label or "custom_qubit", t_max=t_max)
    p = config.params
    return qutrit_schedule(p["omega0"], p["Omega0"], p["omega"], p["chi"], t_max=t_max)


def build_initial_state(config: ScenarioConfig) -> np.ndarray:
    """Normalized initial state vector of a config."""
    if config.is_qubit:
        return state_from_angles(config.initial_state["theta"], config.initial_state["phi"])
    amplitudes = np.array([complex(re, im) for re, im in config.initial_state["amplitudes"]])
    return amplitudes / np.linalg.norm(amplitudes)
