import numpy as np
import pytest

from hiddenmem.circuits import hidden_memory_circuit, incompatible_circuit
from hiddenmem.quantum import all_pattern_statistics


@pytest.fixture(scope="session")
def fig2():
    return hidden_memory_circuit()


@pytest.fixture(scope="session")
def fig3():
    return incompatible_circuit()


@pytest.fixture(scope="session")
def fig2_family(fig2):
    return all_pattern_statistics(fig2)


@pytest.fixture(scope="session")
def fig3_family(fig3):
    return all_pattern_statistics(fig3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)



# criterion number -> (description, all phases passed so far)
_CRITERIA: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.skipped:
        return
    number, text = marker.args
    ok = _CRITERIA.get(number, (text, True))[1]
    _CRITERIA[number] = (text, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
