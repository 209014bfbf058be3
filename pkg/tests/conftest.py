import re
from collections import defaultdict

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, dict[str, bool]] = defaultdict(dict)


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match or "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _results[int(match.group(1))][report.nodeid] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        checks = _results[number]
        failed = [nodeid.split("::")[-1] for nodeid, ok in checks.items() if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number:2d}: {status} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
