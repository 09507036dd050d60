import io
import json

import numpy as np

from src.output_formatter import (
    TRAJECTORY_HEADERS,
    export_json,
    export_trajectory_csv,
    to_json,
    write_melnikov_csv,
    write_rows_csv,
)
from src.pwhs_system import flow


def test_csv_floats_round_trip():
    stream = io.StringIO()
    write_rows_csv(["x", "label"], [(0.1, "a"), (1 / 3, "b"), (2.0, 7)], stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "x,label"
    assert lines[1] == "0.1,a"
    assert float(lines[2].split(",")[0]) == 1 / 3
    assert lines[3] == "2.0,7"


def test_melnikov_csv_has_r_and_m():
    stream = io.StringIO()
    write_melnikov_csv([(1.5, 0.0), (2.0, -0.25)], stream)
    assert stream.getvalue() == "r,M\n1.5,0.0\n2.0,-0.25\n"


def test_json_is_sorted_and_nulls_non_finite_values():
    text = to_json({"b": float("nan"), "a": [1 + 2j, np.float64(0.5)]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [[1.0, 2.0], 0.5], "b": None}
    assert text.endswith("\n")


def test_trajectory_export(rotation, tmp_path):
    trajectory = flow(rotation, 2 + 0j, max_crossings=2)
    path = export_trajectory_csv(trajectory, str(tmp_path / "orbit.csv"))
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0].split(",") == TRAJECTORY_HEADERS
    assert len(lines) == len(trajectory.rows()) + 1
    assert sum(int(line.split(",")[4]) for line in lines[1:]) == 2


def test_json_export(tmp_path):
    path = export_json({"passed": True}, str(tmp_path / "report.json"))
    assert json.loads(open(path, encoding="utf-8").read()) == {"passed": True}
