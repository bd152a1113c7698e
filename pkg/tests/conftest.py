import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

from treeqg.toy import BRAZIL, ERICSSON, TIM, TIM_QUESTION, write_toy  # noqa: E402
from treeqg.treebank import LangConfig  # noqa: E402

# case-preserving config, used wherever mixed-case golden strings are compared
KEEP_CASE = LangConfig(lowercase=False)


@pytest.fixture
def tim():
    return TIM


@pytest.fixture
def tim_question():
    return TIM_QUESTION


@pytest.fixture
def brazil():
    return BRAZIL


@pytest.fixture
def ericsson():
    return ERICSSON


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory):
    return write_toy(tmp_path_factory.mktemp("toy"))


# -- acceptance report ------------------------------------------------------

import time  # noqa: E402

SESSION_START = time.perf_counter()
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - SESSION_START
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    ok = elapsed < 60
    terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  suite runtime: {elapsed:.1f} s (< 60 s)")
