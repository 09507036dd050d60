"""Configuration management for the PWHS toolkit."""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent.parent / ".env"
load_dotenv(env_path)


def _float(name: str, default: str) -> float:
    return float(os.getenv(f"PWHS_{name}", default))


def _int(name: str, default: str) -> int:
    return int(os.getenv(f"PWHS_{name}", default))


class Config:
    """Numerical tolerances and limits, overridable from the environment."""

    # Integrator (embedded 4/5 pair)
    RTOL: float = _float("RTOL", "1e-10")
    ATOL: float = _float("ATOL", "1e-10")
    FIRST_STEP: float = _float("FIRST_STEP", "1e-3")
    MIN_STEP: float = _float("MIN_STEP", "1e-12")
    MAX_STEP: float = _float("MAX_STEP", "0.05")

    # Boundary events
    EVENT_TOL: float = _float("EVENT_TOL", "1e-9")
    BISECTION_MAX_ITER: int = _int("BISECTION_MAX_ITER", "60")
    BOUNDARY_TOL: float = _float("BOUNDARY_TOL", "1e-9")
    TANGENCY_TOL: float = _float("TANGENCY_TOL", "1e-9")

    # Poles
    POLE_TOL: float = _float("POLE_TOL", "1e-14")  # relative, for evaluation
    POLE_APPROACH_TOL: float = _float("POLE_APPROACH_TOL", "1e-8")  # absolute, during flow

    # Level functions and Melnikov integrals
    GRADIENT_STEP: float = _float("GRADIENT_STEP", "1e-6")
    QUAD_ABS_TOL: float = _float("QUAD_ABS_TOL", "1e-10")
    RANK_CONDITION_LIMIT: float = _float("RANK_CONDITION_LIMIT", "1e12")

    # Crossing solver
    NEWTON_TOL: float = _float("NEWTON_TOL", "1e-12")
    NEWTON_MAX_ITER: int = _int("NEWTON_MAX_ITER", "100")
    DEDUP_RADIUS: float = _float("DEDUP_RADIUS", "1e-6")
    NONISOLATED_THRESHOLD: int = _int("NONISOLATED_THRESHOLD", "50")
    SEARCH_BOX: float = _float("SEARCH_BOX", "20")
    SEEDS_PER_AXIS: int = _int("SEEDS_PER_AXIS", "20")

    # Time limits
    FLOW_MAX_TIME: float = _float("FLOW_MAX_TIME", "1000")
    ARC_MAX_TIME: float = _float("ARC_MAX_TIME", "200")

    # Output
    JSON_DIGITS: int = _int("JSON_DIGITS", "15")

    @classmethod
    def validate(cls) -> bool:
        """Validate that every tolerance is positive and every limit usable."""
        positive = [
            "RTOL", "ATOL", "FIRST_STEP", "MIN_STEP", "MAX_STEP", "EVENT_TOL",
            "BOUNDARY_TOL", "TANGENCY_TOL", "POLE_TOL", "POLE_APPROACH_TOL",
            "GRADIENT_STEP", "QUAD_ABS_TOL", "RANK_CONDITION_LIMIT",
            "NEWTON_TOL", "DEDUP_RADIUS", "SEARCH_BOX", "FLOW_MAX_TIME",
            "ARC_MAX_TIME",
        ]
        for name in positive:
            if not getattr(cls, name) > 0:
                raise ValueError(
                    f"PWHS_{name} must be positive, got {getattr(cls, name)!r}. "
                    "Please fix it in the .env file."
                )
        counts = [
            "BISECTION_MAX_ITER", "NEWTON_MAX_ITER", "NONISOLATED_THRESHOLD",
            "SEEDS_PER_AXIS", "JSON_DIGITS",
        ]
        for name in counts:
            if getattr(cls, name) < 1:
                raise ValueError(
                    f"PWHS_{name} must be at least 1, got {getattr(cls, name)!r}."
                )
        if cls.MIN_STEP > cls.FIRST_STEP:
            raise ValueError("PWHS_MIN_STEP must not exceed PWHS_FIRST_STEP.")
        return True
