import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): acceptance criterion with a time limit in seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.failed:
        number, title, limit = mark.args
        previous = _CRITERIA.get(number)
        passed = rep.passed and (previous is None or previous[2])
        elapsed = rep.duration + (previous[3] if previous else 0.0)
        _CRITERIA[number] = (title, limit, passed, elapsed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, limit, passed, elapsed = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{verdict}  {number:>2}. {title} ({elapsed:.1f}s, limit {limit}s)")
