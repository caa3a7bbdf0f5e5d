import sys

import pytest

from memsim.experiments import ExperimentParams
from memsim.neuron import build_standard_netlist


@pytest.fixture(scope="session")
def params():
    return ExperimentParams()


@pytest.fixture(scope="session")
def open_loop():
    return build_standard_netlist()


@pytest.fixture(scope="session")
def closed_loop():
    return build_standard_netlist(mode="closed_loop")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
