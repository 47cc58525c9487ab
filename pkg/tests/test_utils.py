import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from quantum_frenet.exceptions import OutputError
from quantum_frenet.utils import (
    get_nested_value,
    jsonable,
    plot_orbit_svg,
    plot_series_svg,
    write_csv,
    write_json,
)


def test_get_nested_value():
    data = {"grid": {"t_max": 5.0, "steps": None}}
    assert get_nested_value(data, "grid", "t_max") == 5.0
    assert get_nested_value(data, "grid", "steps", default=16) == 16
    assert get_nested_value(data, "params", "omega0", default=1.0) == 1.0
    assert get_nested_value(data, "grid", "t_max", "deeper") is None


def test_jsonable():
    value = {
        "labels": frozenset({"weak_driving", "near_resonance"}),
        "vector": np.array([1.0, np.nan]),
        "count": np.int64(3),
        "flag": np.bool_(True),
        "peak": np.float64(math.inf),
    }
    assert jsonable(value) == {
        "labels": ["near_resonance", "weak_driving"],
        "vector": [1.0, None],
        "count": 3,
        "flag": True,
        "peak": None,
    }
    json.dumps(jsonable(value), allow_nan=False)


def test_write_csv_format(tmp_path):
    table = pd.DataFrame({"t": [0.0, 0.1], "kappa2": [np.nan, 1 / 3]})
    path = write_csv(table, tmp_path / "out.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[0] == "t,kappa2"
    assert lines[1] == "0,"
    assert lines[2] == "0.10000000000000001,0.33333333333333331"
    assert float(lines[2].split(",")[1]) == 1 / 3


def test_write_csv_is_repeatable(tmp_path):
    table = pd.DataFrame({"v": np.linspace(0.0, 1.0, 7) ** 0.5})
    first = write_csv(table, tmp_path / "a.csv").read_bytes()
    second = write_csv(table, tmp_path / "b.csv").read_bytes()
    assert first == second


def test_write_csv_to_missing_directory(tmp_path):
    with pytest.raises(OutputError):
        write_csv(pd.DataFrame({"t": [0.0]}), tmp_path / "missing" / "out.csv")


def test_write_json(tmp_path):
    path = write_json({"max_kappa2": np.float64(2.5), "gap": np.nan}, tmp_path / "run.json")
    assert json.loads(path.read_text(encoding="utf-8")) == {"max_kappa2": 2.5, "gap": None}
    with pytest.raises(OutputError):
        write_json({}, tmp_path / "missing" / "run.json")


def test_series_svg_is_valid_xml(tmp_path):
    t = np.linspace(0.0, 1.0, 50)
    values = np.sin(t)
    values[:2] = np.nan
    path = plot_series_svg(tmp_path / "kappa.svg", t, {"expect": values, "projector": values * 1.01},
                           "t", "κ²", title="curvature")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")


def test_series_svg_is_repeatable(tmp_path):
    t = np.linspace(0.0, 1.0, 20)
    first = plot_series_svg(tmp_path / "a.svg", t, {"v": t ** 2}, "t", "v").read_bytes()
    second = plot_series_svg(tmp_path / "b.svg", t, {"v": t ** 2}, "t", "v").read_bytes()
    assert first == second


def test_orbit_svg_is_valid_xml(tmp_path):
    angles = np.linspace(0.0, 2 * math.pi, 100)
    orbit = np.stack([np.cos(angles), np.sin(angles), np.zeros_like(angles)], axis=-1)
    root = ET.parse(plot_orbit_svg(tmp_path / "orbit.svg", orbit)).getroot()
    assert root.tag.endswith("svg")
