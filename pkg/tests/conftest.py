import time

import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = ""
    if rep.failed:
        msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else str(rep.longrepr)
        detail = msg.splitlines()[0][:160]
    _OUTCOMES[number] = (title, "PASS" if rep.passed else "FAIL", call.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES, key=lambda x: (int(str(x).rstrip("b")), str(x))):
        title, status, secs, detail = _OUTCOMES[number]
        line = f"criterion {number:<3} {status}  {title}  ({secs:.2f}s)"
        if detail:
            line += f"  [{detail}]"
        tr.write_line(line)


@pytest.fixture
def stopwatch():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
