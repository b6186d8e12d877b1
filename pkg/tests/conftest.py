import warnings

import pytest

from jacobi_gap import series_solver
from jacobi_gap.errors import BreakdownWarning
from jacobi_gap.params import derive

_SERIES_CACHE = {}


def cached_series(a, b, N, D):
    """Series solutions are expensive at high degree; share them across tests."""
    key = (str(a), str(b), str(N), D)
    if key not in _SERIES_CACHE:
        _SERIES_CACHE[key] = series_solver.solve(derive(a, b, N), D)
    return _SERIES_CACHE[key]


@pytest.fixture
def series_cache():
    return cached_series


@pytest.fixture
def quiet_breakdown():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BreakdownWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from tests import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.RESULTS
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=lambda k: (int(k.split()[0]), k)):
        terminalreporter.write_line(lines[key])
