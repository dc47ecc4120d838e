import numpy as np
import pytest

from resodyn.bath import bath_functions
from resodyn.model import BathParams, FormFactor

# criterion id -> (passed, one-line summary); filled by test_acceptance.py
ACCEPTANCE = {}


def record(cid, passed, summary):
    prev = ACCEPTANCE.get(cid)
    if prev is not None:
        passed = passed and prev[0]
        summary = f"{prev[1]}; {summary}"
    ACCEPTANCE[cid] = (bool(passed), summary)


@pytest.fixture
def record_acceptance():
    return record


@pytest.fixture(scope="session")
def bf_default():
    return bath_functions(FormFactor(), BathParams(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda s: int(s[2:])):
        ok, msg = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid} {msg}")
