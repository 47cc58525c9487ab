"""
Operation modes: run a scenario, sweep one of its parameters, validate the invariant suite.
"""

import dataclasses
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .checks import CheckResult, run_checks
from .evolution import Trajectory, parallel_transport_residual, propagate, trajectory_from_states
from .exceptions import InvalidConfigError, OutputError, QuantumFrenetError
from .frenet import (
    CurvatureDecomposition,
    FrenetSample,
    expectation_route,
    frenet_samples,
    projector_route,
    route_gap,
)
from .qubit import bloch_from_state, bloch_route
from .rabi import classify_regime, exact_states
from .scenarios import ScenarioConfig, build_initial_state, build_schedule, load_config, rabi_params
from .utils import plot_orbit_svg, plot_series_svg, write_csv, write_json

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t", "s", "v", "v_dot", "ax", "ay", "az",
    "kappa2_bloch", "kappa2_expect", "kappa2_projector", "tau2_expect", "tau2_residual",
)
SUMMARY_COLUMNS = ("value", "max_kappa2", "mean_v", "regimes")
# Route used for sweep summaries and the peak decomposition, first available wins
ROUTE_PREFERENCE = ("expect", "bloch", "projector")


def _finite_max(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    return float(np.max(finite)) if finite.size else math.nan


@dataclass(frozen=True)
class Diagnostics:
    """Numerical health of one run."""
    norm_drift: float
    parallel_transport_residual: float
    route_gaps: dict = field(default_factory=dict)
    max_tau2_residual: Optional[float] = None
    max_tau2_projector: Optional[float] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class RunRecord:
    """Everything a run produced: the config echo, per-point samples and diagnostics."""
    config: ScenarioConfig
    samples: list
    diagnostics: Diagnostics
    bloch: Optional[np.ndarray] = None
    peak: Optional[FrenetSample] = None

    @property
    def regimes(self) -> frozenset:
        params = rabi_params(self.config)
        return classify_regime(params) if params is not None else frozenset()

    def route_values(self, route: str, quantity: str = "kappa2") -> np.ndarray:
        return np.array([getattr(sample, quantity).get(route, math.nan) for sample in self.samples])

    def max_kappa2(self) -> float:
        for route in ROUTE_PREFERENCE:
            if route in self.samples[0].kappa2:
                return _finite_max(self.route_values(route))
        return math.nan

    def mean_speed(self) -> float:
        return float(np.mean([sample.v for sample in self.samples]))

    def table(self) -> pd.DataFrame:
        """Per-point table with the trajectory.csv columns; absent values are NaN."""
        nan = np.full(len(self.samples), np.nan)
        bloch = self.bloch if self.bloch is not None else np.stack([nan, nan, nan], axis=-1)
        columns = {
            "t": [sample.t for sample in self.samples],
            "s": [sample.s for sample in self.samples],
            "v": [sample.v for sample in self.samples],
            "v_dot": [sample.v_dot for sample in self.samples],
            "ax": bloch[:, 0],
            "ay": bloch[:, 1],
            "az": bloch[:, 2],
            "kappa2_bloch": self.route_values("bloch"),
            "kappa2_expect": self.route_values("expect"),
            "kappa2_projector": self.route_values("projector"),
            "tau2_expect": self.route_values("expect", "tau2"),
            "tau2_residual": np.abs(self.route_values("bloch", "tau2")),
        }
        return pd.DataFrame(columns, columns=list(CSV_COLUMNS))

    def to_dict(self) -> dict:
        payload = {
            "config": self.config.to_dict(),
            "regimes": self.regimes,
            "samples": len(self.samples),
            "max_kappa2": self.max_kappa2(),
            "mean_v": self.mean_speed(),
            "diagnostics": self.diagnostics.to_dict(),
        }
        if self.peak is not None:
            payload["peak"] = _peak_dict(self.peak)
        return payload


def _peak_dict(sample: FrenetSample) -> dict:
    peak = {"t": sample.t, "s": sample.s, "v": sample.v, "kappa2": dict(sample.kappa2), "tau2": dict(sample.tau2)}
    decomposition: Optional[CurvatureDecomposition] = sample.decomposition
    if decomposition is not None:
        peak["decomposition"] = {
            **dataclasses.asdict(decomposition),
            "kappa2": decomposition.kappa2,
            "tau2": decomposition.tau2,
        }
    return peak


def _trajectory(config: ScenarioConfig, schedule) -> Trajectory:
    psi0 = build_initial_state(config)
    grid = config.grid
    if "exact" in config.methods:
        logger.debug("Using the exact Rabi propagator on %d steps", grid.steps)
        states = exact_states(rabi_params(config), psi0, grid.times)
        return trajectory_from_states(schedule, grid.times, states, method="exact")
    logger.debug("Integrating with %s on %d steps", config.integrator, grid.steps)
    return propagate(schedule, psi0, grid, method=config.integrator)


def _route_gaps(kappa2: dict) -> dict:
    routes = [route for route in ROUTE_PREFERENCE if route in kappa2]
    return {
        f"{first}/{second}": route_gap(kappa2[first], kappa2[second])
        for i, first in enumerate(routes) for second in routes[i + 1:]
    }


def simulate(config: ScenarioConfig) -> RunRecord:
    """
    Propagate a scenario and evaluate curvature and torsion by every requested route.

    Args:
        config: Validated scenario

    Returns:
        RunRecord with one FrenetSample per grid point

    Raises:
        QuantumFrenetError: On invalid schedules or numerical failures
    """
    schedule = build_schedule(config)
    trajectory = _trajectory(config, schedule)

    kappa2, tau2 = {}, {}
    if "expectation" in config.methods:
        kappa2["expect"], tau2["expect"] = expectation_route(trajectory)
    if "projector" in config.methods:
        kappa2["projector"], tau2["projector"] = projector_route(trajectory)

    bloch = None
    if config.is_qubit:
        bloch = bloch_from_state(trajectory.raw_states)
        if "bloch" in config.methods:
            fields = schedule.field_many(trajectory.times)
            kappa2["bloch"], tau2["bloch"] = bloch_route(bloch, fields.m, fields.mdot)

    peak_index = None
    for route in ROUTE_PREFERENCE:
        if route in kappa2 and np.any(np.isfinite(kappa2[route])):
            peak_index = int(np.nanargmax(kappa2[route]))
            break
    samples = frenet_samples(trajectory, kappa2, tau2,
                             decompose_at=() if peak_index is None else (peak_index,))

    diagnostics = Diagnostics(
        norm_drift=trajectory.norm_drift,
        parallel_transport_residual=_finite_max(parallel_transport_residual(trajectory)),
        route_gaps=_route_gaps(kappa2),
        max_tau2_residual=_finite_max(np.abs(tau2["bloch"])) if "bloch" in tau2 else None,
        max_tau2_projector=(_finite_max(tau2["projector"])
                            if config.is_qubit and "projector" in tau2 else None),
    )
    logger.debug("Diagnostics: %s", diagnostics)
    return RunRecord(
        config=config,
        samples=samples,
        diagnostics=diagnostics,
        bloch=bloch,
        peak=None if peak_index is None else samples[peak_index],
    )


def write_artifacts(record: RunRecord, out_dir: Path) -> list:
    """
    Write trajectory.csv, run.json and the SVG figures of a run.

    The CSV is written first so that a plotting failure leaves it intact.

    Raises:
        OutputError: If the directory or any file cannot be written
    """
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Failed to create output directory {out_dir}: {e}")

    outputs = record.config.outputs
    written = []
    table = record.table()
    if "csv" in outputs:
        written.append(write_csv(table, out_dir / "trajectory.csv"))
    written.append(write_json(record.to_dict(), out_dir / "run.json"))

    if "svg" in outputs:
        label = record.config.label or record.config.scenario
        kappa_series = {
            name.removeprefix("kappa2_"): table[name].to_numpy()
            for name in ("kappa2_bloch", "kappa2_expect", "kappa2_projector")
            if table[name].notna().any()
        }
        if kappa_series:
            written.append(plot_series_svg(out_dir / "kappa.svg", table["t"].to_numpy(), kappa_series,
                                           "t", "κ²", title=label))
        written.append(plot_series_svg(out_dir / "speed.svg", table["t"].to_numpy(),
                                       {"v": table["v"].to_numpy()}, "t", "v", title=label))
        if record.bloch is not None:
            written.append(plot_orbit_svg(out_dir / "orbit.svg", record.bloch, title=label))
    return written


def _report(record: RunRecord) -> None:
    diagnostics = record.diagnostics
    if diagnostics.max_tau2_residual is not None and diagnostics.max_tau2_residual > 1e-6:
        print(f"⚠️  Warning: qubit torsion residual {diagnostics.max_tau2_residual:.3e} exceeds 1e-6",
              file=sys.stderr)
    if diagnostics.norm_drift > 1e-6:
        print(f"⚠️  Warning: norm drift {diagnostics.norm_drift:.3e}", file=sys.stderr)


def run_scenario(config_path: Path, out_dir: Path) -> RunRecord:
    """
    Simulate one scenario file and write its artifacts.

    Args:
        config_path: Scenario JSON file
        out_dir: Output directory, created if missing

    Raises:
        QuantumFrenetError: If the config is invalid, the numerics fail or outputs cannot be written
    """
    try:
        config = load_config(config_path)
        print(f"🧭 Simulating {config.label or config.scenario} ({config.grid.steps} steps)")
        record = simulate(config)
        _report(record)
        for path in write_artifacts(record, out_dir):
            print(f"✅ {path.name} written: {path}")
        print("🎉 Done")
        return record

    except QuantumFrenetError:
        raise
    except Exception as e:
        raise QuantumFrenetError(f"Unexpected error during run: {e}")


def sweep_scenario(config_path: Path, param: str, values: Sequence[float], out_dir: Path) -> pd.DataFrame:
    """
    Run one scenario per parameter value.

    Every run is written to ``<out_dir>/<param>=<value>/``; a ``sweep_summary.csv`` with
    the peak curvature, mean speed and regime labels of each run is written to ``out_dir``.

    Args:
        config_path: Scenario JSON file
        param: Name of the scenario parameter to vary
        values: Values to try
        out_dir: Output directory

    Returns:
        The summary table

    Raises:
        InvalidConfigError: If ``values`` is empty or ``param`` is not a scenario parameter
    """
    try:
        values = list(values)
        if not values:
            raise InvalidConfigError("--values: at least one value is required")
        base = load_config(config_path)
        configs = [base.with_param(param, value) for value in values]

        rows = []
        for value, config in tqdm(list(zip(values, configs)), desc=f"Sweeping {param}", unit="run"):
            run_dir = out_dir / f"{param}={value:g}"
            record = simulate(config)
            _report(record)
            write_artifacts(record, run_dir)
            tqdm.write(f"✅ {param}={value:g} written: {run_dir}")
            rows.append({
                "value": float(value),
                "max_kappa2": record.max_kappa2(),
                "mean_v": record.mean_speed(),
                "regimes": ";".join(sorted(record.regimes)),
            })

        summary = pd.DataFrame(rows, columns=list(SUMMARY_COLUMNS))
        path = write_csv(summary, out_dir / "sweep_summary.csv")
        print(f"✅ Summary written: {path}")
        print("🎉 Done")
        return summary

    except QuantumFrenetError:
        raise
    except Exception as e:
        raise QuantumFrenetError(f"Unexpected error during sweep: {e}")


def format_results(results: Sequence[CheckResult]) -> str:
    """Pass/fail table, one line per check."""
    width = max(len(result.name) for result in results)
    lines = []
    for result in results:
        mark = "✅" if result.passed else "❌"
        line = f"{mark} {result.name:<{width}}  {result.measured:.3e} (tol {result.tolerance:.1e})"
        if result.detail:
            line += f"  {result.detail}"
        lines.append(line)
    return "\n".join(lines)


def validate_suite(seed: int, draws: int) -> bool:
    """
    Run the invariant suite and print its table.

    Returns:
        True if every check passed
    """
    if draws < 1:
        raise InvalidConfigError(f"--draws: must be at least 1, got {draws}")
    print(f"🧭 Running invariant checks (seed {seed}, {draws} draws)")
    results = run_checks(seed, draws, progress=lambda it: tqdm(it, desc="Checks", unit="check"))
    print(format_results(results))
    failed = [result for result in results if not result.passed]
    if failed:
        print(f"❌ {len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return False
    print(f"🎉 All {len(results)} checks passed")
    return True
