import pytest

from support import random_suite, worked_example


@pytest.fixture
def example():
    return worked_example()


@pytest.fixture(scope="session")
def suite():
    return random_suite()


def pytest_terminal_summary(terminalreporter):
    from support import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
