import pytest

from src.config import Config


def test_defaults_validate():
    assert Config.validate() is True


def test_non_positive_tolerance_is_rejected(monkeypatch):
    monkeypatch.setattr(Config, "RTOL", 0.0)
    with pytest.raises(ValueError, match="PWHS_RTOL"):
        Config.validate()


def test_min_step_above_first_step_is_rejected(monkeypatch):
    monkeypatch.setattr(Config, "MIN_STEP", 1.0)
    with pytest.raises(ValueError, match="PWHS_MIN_STEP"):
        Config.validate()


def test_zero_count_is_rejected(monkeypatch):
    monkeypatch.setattr(Config, "SEEDS_PER_AXIS", 0)
    with pytest.raises(ValueError, match="PWHS_SEEDS_PER_AXIS"):
        Config.validate()
