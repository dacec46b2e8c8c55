import numpy as np
import pytest

from src.config import get_settings
from src.metric.metric_core import MetricSpace, from_points
from src.objective.objectives import builtin


LINE4_POINTS = [[0.0], [1.0], [10.0], [11.0]]


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Each test sees defaults unless it sets RC_* variables itself."""
    for name in ("RC_THREADS", "RC_EPS", "RC_TIE_TOL", "RC_ORACLE_CAP", "RC_CENTER_CAP", "RC_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def line4() -> MetricSpace:
    return from_points(LINE4_POINTS)


@pytest.fixture
def line3() -> MetricSpace:
    return from_points([[0.0], [1.0], [2.0]])


@pytest.fixture
def unit_square() -> MetricSpace:
    return from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def kmedian():
    return builtin("kmedian")


@pytest.fixture
def kmeans():
    return builtin("kmeans")


@pytest.fixture
def kcenter():
    return builtin("kcenter")


def random_points(n: int, seed: int, dim: int = 2) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(0.0, 10.0, size=(n, dim))


def random_metric(n: int, seed: int, dim: int = 2) -> MetricSpace:
    return from_points(random_points(n, seed, dim))


def all_objectives(n: int, seed: int = 0):
    rng = np.random.Generator(np.random.PCG64(seed + 10_000))
    return [
        builtin("kmedian"),
        builtin("kmeans"),
        builtin("kcenter"),
        builtin("facility_location", opening_costs=rng.uniform(0.0, 0.5, size=n), n=n),
    ]


@pytest.fixture
def metric_factory():
    return random_metric
