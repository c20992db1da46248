import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracle import frozen  # noqa: E402


@pytest.fixture(scope="session")
def oracle():
    return frozen()


@pytest.fixture(autouse=True)
def _quiet_geometry_warnings(request):
    if request.node.get_closest_marker("keep_warnings"):
        yield
        return
    from mfshelm.geometry import SelfIntersectionWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SelfIntersectionWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
