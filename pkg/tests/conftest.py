from __future__ import annotations

import functools
import os

import pytest
from hypothesis import HealthCheck, settings

from itbcodes.catalog import load_code
from itbcodes.code import code_from_strings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=50)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@functools.lru_cache(maxsize=None)
def bundled(name: str):
    return load_code(name)


@functools.lru_cache(maxsize=None)
def toy_code():
    """[[4,2,2]]: torus (2,1,1), A = B = 1 + x."""
    return code_from_strings("2,1,1", "1+x", "1+x", name="toy_4_2_2")


@pytest.fixture(scope="session")
def toy():
    return toy_code()


@pytest.fixture(scope="session")
def c54_8_6():
    return bundled("54_8_6")


@pytest.fixture(scope="session")
def c54_14_5():
    return bundled("54_14_5")


@pytest.fixture(scope="session")
def c84():
    return bundled("84_6_10")


@pytest.fixture(scope="session")
def bb72():
    return bundled("bb_72_12_6")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
