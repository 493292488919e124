import tempfile

import pytest

from ddshaper.core.config import DDGridParams


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", default=False, help="run full-size (M = N = 32) reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size reproduction, needs --slow option to run")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--slow"):
        skip_slow = pytest.mark.skip(reason="need --slow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture(scope="module")
def temp_dir():
    with tempfile.TemporaryDirectory(dir=".") as d:
        yield d


@pytest.fixture(scope="module")
def small_grid():
    yield DDGridParams(M=4, N=4, T=1.0, Q=8)


@pytest.fixture(scope="module")
def grid():
    yield DDGridParams(M=8, N=8, T=1.0, Q=8)
