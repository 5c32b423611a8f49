import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import load  # noqa: E402

from nablafrac.families import Const, ConstForcing, Geometric, GeometricRising, Saturating  # noqa: E402
from nablafrac.solver import LinearProblem, NonlinearProblem  # noqa: E402

GAMMA_15 = math.gamma(1.5)

_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _acceptance_results.get(number, (title, True))
        _acceptance_results[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        title, ok = _acceptance_results[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}")


@pytest.fixture(scope="session")
def oracle():
    return load()


@pytest.fixture
def geometric_p():
    return GeometricRising(c=2.0, nu=0.5)


@pytest.fixture
def closed_form(geometric_p):
    """y(t) = 1 + 2^-t is the exact solution."""
    return NonlinearProblem(a=0.0, nu=0.5, M=1.0, p=geometric_p, F=ConstForcing(GAMMA_15), K=0.5)


@pytest.fixture
def saturating(geometric_p):
    return NonlinearProblem(a=0.0, nu=0.5, M=1.0, p=geometric_p, F=Saturating(0.4), K=0.4)


@pytest.fixture
def shifted_linear(geometric_p, oracle):
    return LinearProblem(
        a=0.0,
        nu=0.5,
        M=1.0,
        p=geometric_p,
        q=Geometric(oracle["linear_c"], 0.5),
        f=Geometric(-1.0, 0.5),
    )


@pytest.fixture
def zero_forcing(geometric_p):
    return NonlinearProblem(a=0.0, nu=0.5, M=2.0, p=geometric_p, F=ConstForcing(0.0), K=0.3)


@pytest.fixture
def constant_p():
    return Const(1.0)
