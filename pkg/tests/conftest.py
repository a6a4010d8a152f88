import itertools
import re
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from runnerlab.core import SpeedSet
from runnerlab.exact_ml import ml_exact

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@lru_cache(maxsize=None)
def exhaustive_family(n_max=4, v_max=25):
    """Every set with at most n_max speeds in [1, v_max], with its exact ML."""
    out = []
    for n in range(1, n_max + 1):
        for combo in itertools.combinations(range(1, v_max + 1), n):
            V = SpeedSet(combo)
            out.append((V, ml_exact(V).value))
    return tuple(out)


@pytest.fixture(scope="session")
def family():
    return exhaustive_family()


_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed:
        if report.failed or key not in _CRITERIA:
            _CRITERIA[key] = "FAIL" if report.failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), verdict in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name.replace('_', ' ')}: {verdict}")
