import json

import pytest

from src.crossing_solver import build_crossing_system
from src.field_core import HolomorphicField, Monomial
from src.geometry import STRIP, ZONES
from src.presets import crossing_d_one, crossing_d_two, strip_params
from src.pwhs_system import PiecewiseSystem


@pytest.fixture
def rotation():
    """ż = iz in every zone of the strip."""
    f = HolomorphicField.from_tag(Monomial(1))
    return PiecewiseSystem(STRIP, {zone: f for zone in ZONES}, name="rotation")


@pytest.fixture
def lc1():
    return strip_params("lc1")


@pytest.fixture(scope="session")
def d_one_system():
    return build_crossing_system(crossing_d_one())


@pytest.fixture(scope="session")
def d_two_system():
    return build_crossing_system(crossing_d_two())


@pytest.fixture
def write_config(tmp_path):
    """Write a run configuration document and return its path."""

    def write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def rotation_spec():
    """JSON description of the ``rotation`` system."""
    return {
        "partition": "parallel_strip",
        "zones": {zone: {"type": "monomial", "n": 1} for zone in ("+", "c", "-")},
        "name": "rotation",
    }
