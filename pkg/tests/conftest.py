import time

import pytest
from hypothesis import settings

from classdens import census

settings.register_profile("classdens", max_examples=80, deadline=None)
settings.load_profile("classdens")


@pytest.fixture(scope="session")
def census_1e6():
    """One fresh x = 10^6 census per session, timed."""
    t0 = time.time()
    c = census.run_census(10 ** 6)
    c.meta["seconds"] = time.time() - t0
    return c


@pytest.fixture(scope="session")
def census_1e3():
    return census.run_census(1000, "cycles")


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion."""
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        line = "CRITERION %s: %s  %s" % (number, "PASS" if passed else "FAIL", detail)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(key):
        head, _, tail = str(key).partition("-")
        return int(head), tail

    for number in sorted(ACCEPTANCE, key=order):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line("criterion %-4s %s  %s" % (number, "PASS" if passed else "FAIL", detail))
