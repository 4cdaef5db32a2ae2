import collections

import pytest

_results = collections.OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion covered")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    sub, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _results.setdefault(sub, (text, []))[1].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    groups = collections.OrderedDict()
    for sub, (text, oks) in _results.items():
        groups.setdefault(sub.rstrip("abcdefghij"), []).append((sub, text, all(oks)))
    for crit, subs in sorted(groups.items(), key=lambda kv: int(kv[0])):
        ok = all(s[2] for s in subs)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for sub, text, sub_ok in subs:
            tr.write_line(f"    {sub:4s} {'PASS' if sub_ok else 'FAIL'}  {text}")
