import pytest

from lagroute import kernels
from lagroute.netlist import make_instance


@pytest.fixture(params=["cython", "python"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    if request.param == "cython":
        if kernels.compiled_route_block is None:
            pytest.skip("compiled extension not built")
        monkeypatch.setattr(kernels, "route_block", kernels.compiled_route_block)
    else:
        monkeypatch.setattr(kernels, "route_block", kernels.python_route_block)
    return request.param


@pytest.fixture
def corridor():
    # crossing nets on a 2x3 grid: a-f and d-c cannot be edge-disjoint
    return make_instance(2, 3, 1, [[(0, 0), (1, 2)], [(1, 0), (0, 2)]])


@pytest.fixture
def disjoint_pair():
    return make_instance(4, 4, 4, [[(0, 0), (0, 3)], [(3, 0), (3, 3)]])


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """``record(criterion, status, detail)`` appends one summary line per criterion."""
    def record(criterion, status, detail):
        line = f"[{status}] {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
