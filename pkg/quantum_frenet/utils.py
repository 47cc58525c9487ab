"""
Utility functions for quantum_frenet: nested config access and artifact writers.
"""

import json
import math
from pathlib import Path
from typing import Any, Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .exceptions import OutputError  # noqa: E402

CSV_FLOAT_FORMAT = "%.17g"
# No creation date and a fixed id salt: repeated runs produce identical SVG files
SVG_METADATA = {"Date": None, "Creator": None}
matplotlib.rcParams["svg.hashsalt"] = "quantum_frenet"


def get_nested_value(data: dict, *keys: str, default: Any = None) -> Any:
    """
    Safely extract a value from nested dictionaries.

    Args:
        data: The dictionary to extract from
        *keys: Variable number of keys for nested access
        default: Default value if the key path doesn't exist or holds None

    Returns:
        The value at the nested key path, or default if not found

    Examples:
        >>> data = {"params": {"omega0": 1.0, "Omega0": 0.0}}
        >>> get_nested_value(data, "params", "omega0")
        1.0
        >>> get_nested_value(data, "params", "Omega0", default=5.0)
        0.0
        >>> get_nested_value(data, "grid", "steps", default=16)
        16
    """
    current = data
    for key in keys:
        if not isinstance(current, dict) or key not in current:
            return default
        current = current[key]

    return default if current is None else current


def jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into strict-JSON values."""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    return value


def write_csv(table: pd.DataFrame, path: Path) -> Path:
    """
    Write a table with 17 significant digits, '\\n' line endings and empty fields for NaN.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n")
    except OSError as e:
        raise OutputError(f"Failed to write CSV file {path}: {e}")
    return path


def write_json(payload: Mapping[str, Any], path: Path) -> Path:
    """
    Write ``payload`` as indented strict JSON.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(jsonable(payload), f, indent=2, allow_nan=False)
            f.write("\n")
    except OSError as e:
        raise OutputError(f"Failed to write JSON file {path}: {e}")
    return path


def _save_svg(fig, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata=SVG_METADATA, bbox_inches="tight")
    except (OSError, ValueError) as e:
        raise OutputError(f"Failed to write SVG file {path}: {e}")
    finally:
        plt.close(fig)
    return path


def plot_series_svg(path: Path, x: np.ndarray, series: Mapping[str, np.ndarray],
                    xlabel: str, ylabel: str, title: str = "") -> Path:
    """
    Line chart of one or more series sharing the x axis.

    NaN entries leave gaps in the lines.
    """
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for name, values in series.items():
        ax.plot(x, values, label=name, linewidth=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(loc="best", fontsize="small")
    ax.grid(True, alpha=0.3)
    return _save_svg(fig, path)


def plot_orbit_svg(path: Path, orbit: np.ndarray, azimuth: float = math.radians(30),
                   elevation: float = math.radians(20), title: str = "") -> Path:
    """
    Orthographic view of the Bloch sphere with an orbit drawn on it.

    The part of the orbit facing the viewer is drawn solid, the hidden part dashed.
    """
    view = np.array([math.cos(elevation) * math.cos(azimuth),
                     math.cos(elevation) * math.sin(azimuth),
                     math.sin(elevation)])
    right = np.array([-math.sin(azimuth), math.cos(azimuth), 0.0])
    up = np.cross(view, right)

    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    circle = np.linspace(0.0, 2 * math.pi, 361)
    ax.plot(np.cos(circle), np.sin(circle), color="0.3", linewidth=0.8)

    # Equator, with its hidden half dashed
    equator = np.stack([np.cos(circle), np.sin(circle), np.zeros_like(circle)], axis=-1)
    _draw_projected(ax, equator, view, right, up, color="0.6", linewidth=0.6)

    for axis_vector, name in ((np.eye(3)[0], "x"), (np.eye(3)[1], "y"), (np.eye(3)[2], "z")):
        tip = (axis_vector @ right, axis_vector @ up)
        ax.annotate(name, xy=tip, xytext=(1.1 * tip[0], 1.1 * tip[1]), color="0.4", fontsize="small")

    _draw_projected(ax, np.asarray(orbit, dtype=float), view, right, up, color="tab:blue", linewidth=1.0)
    start = np.asarray(orbit[0], dtype=float)
    ax.plot(start @ right, start @ up, "o", color="tab:red", markersize=4)

    ax.set_aspect("equal")
    ax.set_xlim(-1.2, 1.2)
    ax.set_ylim(-1.2, 1.2)
    ax.axis("off")
    if title:
        ax.set_title(title)
    return _save_svg(fig, path)


def _draw_projected(ax, points: np.ndarray, view, right, up, **style) -> None:
    x = points @ right
    y = points @ up
    front = points @ view >= 0
    ax.plot(np.where(front, x, np.nan), np.where(front, y, np.nan), linestyle="-", **style)
    ax.plot(np.where(front, np.nan, x), np.where(front, np.nan, y), linestyle="--", alpha=0.5, **style)
