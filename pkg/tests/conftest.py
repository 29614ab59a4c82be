import pytest

_RESULTS = {}  # criterion number -> list of (nodeid, passed)
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    _TITLES[n] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _RESULTS.setdefault(n, []).append((item.nodeid, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        runs = _RESULTS[n]
        failed = [nid.split("::")[-1] for nid, ok in runs if not ok]
        status = "FAIL" if failed else "PASS"
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n}: {status} - {_TITLES[n]} [{len(runs) - len(failed)}/{len(runs)}]{detail}")
