"""Collects acceptance outcomes and prints one line per criterion at the end."""

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    label, text = mark.args
    ok = call.excinfo is None
    prev = _RESULTS.get(label, (True, text))
    _RESULTS[label] = (prev[0] and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: (int(s.rstrip("ab")), s)):
        ok, text = _RESULTS[label]
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'} - {text}")
