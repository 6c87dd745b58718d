import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.module.__name__.endswith("test_acceptance") and item.name.startswith("test_criterion_"):
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _criteria[item.nodeid] = [doc, "NOT RUN"]


def pytest_runtest_logreport(report):
    entry = _criteria.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry[1] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for doc, status in _criteria.values():
        terminalreporter.write_line(f"{status:4s}  {doc}")
