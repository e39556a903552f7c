import numpy as np
import pytest

from mixedstab.stability import case_forms


def pytest_configure(config):
    config._acceptance_results = []


@pytest.fixture(scope="session")
def forms_for(request):
    """Session cache of assembled forms keyed by (family, n, r)."""
    cache = {}

    def get(family, n, r):
        key = (family, n, r)
        if key not in cache:
            cache[key] = case_forms(family, n, r)
        return cache[key]

    return get


@pytest.fixture
def record(request):
    """Recorder for acceptance checks; one summary line per criterion."""
    results = request.config._acceptance_results

    def _record(criterion, passed, detail=""):
        results.append((criterion, bool(passed), detail))
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {criterion}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
