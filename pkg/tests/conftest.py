import time

import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, limit_s): numbered acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a one-line detail to the criterion summary and time the test body."""
    marker = request.node.get_closest_marker("criterion")
    entry = {"detail": "", "start": time.perf_counter()}
    request.node.criterion_entry = entry

    def note(text):
        entry["detail"] = text

    note.limit = marker.args[1] if marker else None
    note.elapsed = lambda: time.perf_counter() - entry["start"]
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    k = marker.args[0]
    entry = getattr(item, "criterion_entry", {"detail": ""})
    _OUTCOMES[k] = (rep.passed, entry["detail"], rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        ok, detail, secs = _OUTCOMES[k]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d}: {status} - {detail} ({secs:.1f} s)")
