from pathlib import Path

import pytest

from datalogpm.cli import fixture_path
from datalogpm.parser import load_program, parse_query


def fixture(name):
    return load_program(fixture_path(name + ".dlp"))


def fixture_queries(name):
    text = Path(fixture_path(name + ".queries")).read_text()
    return [parse_query(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def sigma1():
    return fixture("sigma1")


@pytest.fixture
def sigma2():
    return fixture("sigma2")


@pytest.fixture
def sigma3():
    return fixture("sigma3")


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
