import sys
from pathlib import Path

import pytest

from gaspower.scenario import load_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
sys.path.insert(0, str(Path(__file__).resolve().parent))

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): exit criterion from the project brief")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _acceptance.append((marker.args[0], marker.args[1], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    # several checks may share a criterion number; it passes only if all do
    merged = {}
    for number, text, outcome in _acceptance:
        label, ok = merged.get(number, (text, True))
        merged[number] = (label, ok and outcome == "passed")
    for number in sorted(merged):
        text, ok = merged[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] AC{number}: {text}")


def scenario(name):
    return load_scenario(SCENARIOS / name)


@pytest.fixture
def ex1():
    return scenario("example1.json")


@pytest.fixture
def ex1_tpa():
    return scenario("example1_tpa.json")


@pytest.fixture
def ex1_raised_fee():
    return scenario("example1_raised_fee.json")


@pytest.fixture(scope="session")
def ex2():
    return scenario("example2.json")
