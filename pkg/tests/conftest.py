import numpy as np
import pytest
from hypothesis import settings

from dualclip.geometry import ConvexPolygon
from dualclip.workload import cube_polyhedron, regular_tetrahedron

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def square():
    return ConvexPolygon(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))


@pytest.fixture
def cube():
    return cube_polyhedron(1.0)


@pytest.fixture
def tetra():
    return regular_tetrahedron(1.0)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
