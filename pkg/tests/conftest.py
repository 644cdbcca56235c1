import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lssd.polytope import enumerate_vertices, ns_polytope_hrep  # noqa: E402

_CRITERIA = {}


@pytest.fixture(scope="session")
def tripartite_enumeration():
    """Vertices of the three-party binary no-signalling polytope and the seconds taken."""
    t0 = time.perf_counter()
    v = enumerate_vertices(ns_polytope_hrep((2, 2, 2), (2, 2, 2)))
    return v, time.perf_counter() - t0


@pytest.fixture(scope="session")
def tripartite_vertices(tripartite_enumeration):
    return tripartite_enumeration[0]


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, ok, detail)``."""
    def record(key, ok, detail=""):
        line = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _CRITERIA[key] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[key])
