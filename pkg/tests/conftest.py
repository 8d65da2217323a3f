import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, title = mark.args
    entry = _results.setdefault(number, {"title": title, "ok": True, "seconds": 0.0, "tests": 0})
    if report.when == "call":
        entry["tests"] += 1
        entry["seconds"] += report.duration
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        e = _results[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d} {status}  {e['title']}  ({e['seconds']:.1f} s)")
