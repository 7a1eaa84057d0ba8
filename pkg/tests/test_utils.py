# tests/test_utils.py

import json
import math

import pytest

from core.evalloss import TrajectoryRow
from utils.export import (format_float, read_dataset, read_dataset_header, read_trajectory_csv,
                          write_dataset, write_grid_csv, write_summary_json, write_trajectory_csv)
from utils.numerics import NumericTools


def test_format_float_keeps_every_bit():
    for x in (0.1, 1 / 3, -2.5e-300, 1e308, 0.79867663424658819):
        assert float(format_float(x)) == x
    assert format_float(7) == "7"
    assert format_float(0.5) == "0.5"


def test_dataset_file_with_header(tmp_path):
    path = tmp_path / "sub" / "d.txt"
    values = [0.25, -1.0 / 3.0, 2.0]
    write_dataset(str(path), values, header="n_pre=2 n_post=1")
    assert read_dataset(str(path)) == values
    assert read_dataset_header(str(path)) == "n_pre=2 n_post=1"


def test_dataset_without_header(tmp_path):
    path = tmp_path / "plain.txt"
    path.write_text("1.5\n\n-2\n")
    assert read_dataset(str(path)) == [1.5, -2.0]
    assert read_dataset_header(str(path)) == ""


def test_trajectory_csv_round_values(tmp_path):
    row = TrajectoryRow(step=1, y=0.3, u=0.6179114221889527, eps_eff=0.0, log10_capital=-0.01,
                        loss_base=0.4, loss_enhanced=0.41, loss_oracle=0.39, median_enhanced=0.0)
    path = tmp_path / "t.csv"
    write_trajectory_csv(str(path), [row])
    parsed = read_trajectory_csv(str(path))
    assert parsed == [{"step": 1.0, "y": 0.3, "u": 0.6179114221889527, "eps_eff": 0.0,
                       "log10_capital": -0.01, "loss_base": 0.4, "loss_enh": 0.41,
                       "loss_oracle": 0.39, "median_enh": 0.0}]


def test_grid_csv(tmp_path):
    path = tmp_path / "g.csv"
    write_grid_csv(str(path), ["y", "eps=0"], [[0.0, 0.5], [1.0, 0.25]])
    assert path.read_text().splitlines() == ["y,eps=0", "0,0.5", "1,0.25"]


def test_summary_json_non_finite(tmp_path):
    path = tmp_path / "s.json"
    write_summary_json(str(path), {"final_capital": math.inf, "nested": [1.0, -math.inf], "x": None})
    data = json.loads(path.read_text())
    assert data == {"final_capital": "inf", "nested": [1.0, "-inf"], "x": None}


def test_integrate():
    assert NumericTools.integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-12)
    assert NumericTools.integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-9)


def test_ks_critical():
    assert NumericTools.ks_critical(10000) == pytest.approx(0.0163)
    assert NumericTools.ks_critical(100) == pytest.approx(0.163)
