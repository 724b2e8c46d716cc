import functools
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from colorloss.coeffs import coefficient_tables, minimal_size  # noqa: E402
from colorloss.lattice import Geometry, build  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def tables_for(geometry: str, L: int | None = None, ell_max: int = 3):
    g = Geometry.parse(geometry)
    size = L if L is not None else minimal_size(g, ell_max)
    return coefficient_tables(build(g, size), ell_max)


@pytest.fixture(scope="session")
def all_tables():
    return {g.value: tables_for(g.value) for g in Geometry}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
