"""
Environment-driven settings.

Values come from the process environment, optionally seeded from a `.env` file in the
working directory (see `.env.example`).
"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Algorithm defaults
DEFAULT_EPS = 1e-9
DEFAULT_TIE_TOL = 1e-9
ABSOLUTE_TIE_FLOOR = 1e-12
DEFAULT_ORACLE_CAP = 13
DEFAULT_CENTER_CAP = 20
DEFAULT_ALPHA = 2.0


class Settings(BaseModel):
    threads: int = Field(default=1, ge=1)
    eps: float = Field(default=DEFAULT_EPS, ge=0.0)
    tie_tol: float = Field(default=DEFAULT_TIE_TOL, ge=0.0)
    oracle_cap: int = Field(default=DEFAULT_ORACLE_CAP, ge=1)
    center_cap: int = Field(default=DEFAULT_CENTER_CAP, ge=1)
    log_level: str = "WARNING"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    env = {
        "threads": os.getenv("RC_THREADS"),
        "eps": os.getenv("RC_EPS"),
        "tie_tol": os.getenv("RC_TIE_TOL"),
        "oracle_cap": os.getenv("RC_ORACLE_CAP"),
        "center_cap": os.getenv("RC_CENTER_CAP"),
        "log_level": os.getenv("RC_LOG_LEVEL"),
    }
    return Settings(**{key: value for key, value in env.items() if value not in (None, "")})


def tie_tolerance(value: float, rel: float = DEFAULT_TIE_TOL) -> float:
    """Absolute slack for deciding that two costs near `value` are tied."""
    return max(ABSOLUTE_TIE_FLOOR, rel * abs(value))
