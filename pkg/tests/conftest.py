import pytest

from oracles import ACCEPTANCE
from pchsat.gallery import vaccination_scm


@pytest.fixture(scope="session")
def fig1():
    return vaccination_scm()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
