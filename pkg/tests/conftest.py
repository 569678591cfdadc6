import warnings

import pytest

from airythin.errors import NumericalWarning


@pytest.fixture(autouse=True)
def _quiet_numerical_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
