import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from src.main import EXIT_ERROR, EXIT_HALT, EXIT_OK, cli
from src.presets import crossing_d_one
from src.run_config import system_to_spec

ZERO_COEFFS = {
    "a": {"+": [0.0], "c": [0.0], "-": [0.0]},
    "b": {"+": [0.0], "c": [0.0], "-": [0.0]},
}


@pytest.fixture
def runner():
    return CliRunner()


def _csv_lines(text: str) -> list[list[str]]:
    return [line.split(",") for line in text.strip().splitlines()]


def test_simulate_writes_csv_to_stdout(runner, write_config, rotation_spec):
    path = write_config({"system": rotation_spec, "simulate": {"start": [0.5, 0], "max_time": 2 * np.pi}})
    result = runner.invoke(cli, ["simulate", "--config", path])
    assert result.exit_code == EXIT_OK
    lines = _csv_lines(result.output)
    assert lines[0] == ["t", "re", "im", "zone", "event"]
    assert float(lines[-1][0]) == pytest.approx(2 * np.pi)
    assert {line[3] for line in lines[1:]} == {"c"}


def test_invalid_value_exits_with_error(runner, write_config, rotation_spec):
    rotation_spec["epsilon"] = -1
    path = write_config({"system": rotation_spec, "simulate": {"start": 0.5}})
    result = runner.invoke(cli, ["simulate", "--config", path])
    assert result.exit_code == EXIT_ERROR
    assert "epsilon" in result.output


def test_sliding_halt_keeps_the_partial_trajectory(runner, write_config, tmp_path):
    system = {
        "partition": "parallel_strip",
        "zones": {
            "+": {"type": "constant", "value": [0, -1]},
            "c": {"type": "constant", "value": [0, 1]},
            "-": {"type": "constant", "value": [0, 1]},
        },
    }
    path = write_config({"system": system, "simulate": {"start": 0, "max_time": 5.0}})
    out = tmp_path / "orbit.csv"
    result = runner.invoke(cli, ["simulate", "--config", path, "--out", str(out)])
    assert result.exit_code == EXIT_HALT
    lines = _csv_lines(out.read_text(encoding="utf-8"))
    assert lines[0][0] == "t"
    assert float(lines[-1][2]) == pytest.approx(1.0, abs=1e-8)


def test_melnikov_of_a_zero_perturbation(runner, write_config):
    path = write_config({"melnikov": {"basis": "strip", "coefficients": ZERO_COEFFS, "samples": 5}})
    result = runner.invoke(cli, ["melnikov", "--config", path])
    assert result.exit_code == EXIT_OK
    lines = _csv_lines(result.output)
    assert lines[0] == ["r", "M"]
    assert len(lines) == 6
    assert all(float(m) == 0.0 for _, m in lines[1:])


def test_melnikov_targets_with_report(runner, write_config, tmp_path):
    targets = [1.5, 2.0, 3.0, 4.0]
    path = write_config({"melnikov": {"basis": "strip", "targets": targets}})
    out, report = tmp_path / "m.csv", tmp_path / "m.json"
    result = runner.invoke(cli, ["melnikov", "--config", path, "--out", str(out), "--report", str(report)])
    assert result.exit_code == EXIT_OK
    data = json.loads(report.read_text(encoding="utf-8"))
    assert len(data["coefficients"]) == 5
    for t in targets:
        assert min(abs(z - t) for z in data["zeros"]) < 1e-5
    assert out.exists()


def test_cycles_of_the_linear_example(runner, write_config, tmp_path):
    path = write_config({"system": system_to_spec(crossing_d_one()), "cycles": {}})
    out = tmp_path / "cycles.json"
    result = runner.invoke(cli, ["cycles", "--config", path, "--out", str(out)])
    assert result.exit_code == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["valid"] == 1
    assert data["bound"] == 1
    assert data["system"] == "crossing_d_one"


def test_transform_emits_the_moved_system(runner, write_config, rotation_spec, tmp_path):
    path = write_config({"system": rotation_spec, "transform": {"map": "strip_to_external"}})
    out = tmp_path / "moved.json"
    result = runner.invoke(cli, ["transform", "--config", path, "--out", str(out)])
    assert result.exit_code == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["system"]["partition"] == "external_circles"
    assert data["system"]["zones"]["c"]["type"] == "transformed"


def test_portrait_rows(runner, write_config, rotation_spec):
    path = write_config({
        "system": rotation_spec,
        "portrait": {"grid": 5, "starts": [[2, 0]], "max_crossings": 2},
    })
    result = runner.invoke(cli, ["portrait", "--config", path])
    assert result.exit_code == EXIT_OK
    lines = _csv_lines(result.output)
    assert lines[0] == ["kind", "index", "zone", "x", "y", "value"]
    assert {line[0] for line in lines[1:]} == {"level", "orbit"}


def test_verify_single_check(runner, tmp_path):
    out = tmp_path / "verify.json"
    result = runner.invoke(cli, ["verify", "--only", "wronskians", "--out", str(out)])
    assert result.exit_code == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["passed"] is True
    assert [c["name"] for c in data["checks"]] == ["wronskians"]


def test_missing_section_and_files(runner, write_config, rotation_spec, tmp_path):
    result = runner.invoke(cli, ["simulate", "--config", write_config({"system": rotation_spec})])
    assert result.exit_code == EXIT_ERROR
    result = runner.invoke(cli, ["simulate", "--config", str(tmp_path / "absent.json")])
    assert result.exit_code == EXIT_ERROR
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    result = runner.invoke(cli, ["cycles", "--config", str(broken)])
    assert result.exit_code == EXIT_ERROR


def test_error_text_is_printed_literally(runner, write_config, rotation_spec):
    path = write_config({"system": rotation_spec, "simulate": {"start": [1, 2, 3]}})
    result = runner.invoke(cli, ["simulate", "--config", path])
    assert result.exit_code == EXIT_ERROR
    assert "expected [re, im]" in result.output


SHIPPED_CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
COMMANDS = ("simulate", "portrait", "melnikov", "cycles", "transform")


@pytest.mark.parametrize("path", SHIPPED_CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_run(runner, path, tmp_path):
    sections = [s for s in COMMANDS if s in json.loads(path.read_text(encoding="utf-8"))]
    assert sections
    for section in sections:
        out = tmp_path / f"{path.stem}-{section}.out"
        result = runner.invoke(cli, [section, "--config", str(path), "--out", str(out)])
        assert result.exit_code == EXIT_OK, f"{section}: {result.output}"
        assert out.exists()
