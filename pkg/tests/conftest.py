import numpy as np
import pytest

from app.config import get_settings
from app.models import PointSet

_ENV = ("AVTA_SEED", "AVTA_LOG_LEVEL", "AVTA_DEBUG", "AVTA_APPROX_DIAMETER")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long oracle-backed runs over many seeded instances")


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in _ENV:
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def debug_checks(monkeypatch):
    """Turn on the per-iteration solver state check."""
    monkeypatch.setenv("AVTA_DEBUG", "1")
    get_settings.cache_clear()


@pytest.fixture
def triangle() -> PointSet:
    return PointSet([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def square_center() -> PointSet:
    return PointSet([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])


@pytest.fixture
def write_csv(tmp_path):
    def write(name: str, rows) -> str:
        path = tmp_path / name
        path.write_text("".join(",".join(repr(float(value)) for value in row) + "\n" for row in np.atleast_2d(rows)))
        return str(path)

    return write
