import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": [], "ran": False, "notes": []})
    if rep.when == "call" or rep.failed:
        entry["ran"] = True
        if rep.failed:
            entry["failed"].append(item.name)
    if rep.when == "call":
        entry["notes"].extend(v for k, v in item.user_properties if k == "note")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        c = _CRITERIA[n]
        if not c["ran"]:
            status = "SKIP"
        else:
            status = "FAIL" if c["failed"] else "PASS"
        line = f"criterion {n:2d} {status}  {c['title']}"
        if c["failed"]:
            line += f"  [failed: {', '.join(c['failed'])}]"
        tr.write_line(line)
        for note in c["notes"]:
            tr.write_line(f"    {note}")
