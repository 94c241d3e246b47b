import pytest

from singshock.flux import SAMPLE_DATA, analyze
from singshock.inner import build_gamma0, build_iota_table, matching_constants
from singshock.profile import ProfileConfig, continuation, geometric_eps

SWEEP = geometric_eps(1e-2, 0.7, 1e-4)


@pytest.fixture(scope="session")
def analysis():
    return analyze(SAMPLE_DATA)


@pytest.fixture(scope="session")
def table():
    return build_iota_table()


@pytest.fixture(scope="session")
def constants(analysis, table):
    return matching_constants(analysis, table)


@pytest.fixture(scope="session")
def gamma0(analysis, constants, table):
    return build_gamma0(analysis, constants, table)


@pytest.fixture(scope="session")
def sweep(analysis, constants):
    """Continuation sweep eps = 1e-2 -> ~1e-4 (ratio 0.7); list of solutions."""
    out = []
    for eps, sol in continuation(analysis, constants, SWEEP, ProfileConfig()):
        if isinstance(sol, Exception):
            raise sol
        out.append(sol)
    return out


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
