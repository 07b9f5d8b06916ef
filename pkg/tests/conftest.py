import math

import numpy as np
import pytest

from pcsmono import PCSParams, PCSState, PureState, SubsystemLayout, WClassCoefficients

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:2d}: {name} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def bell() -> PureState:
    return PureState(SubsystemLayout((2, 2)), np.array([1, 0, 0, 1]) / math.sqrt(2))


def product(*vecs) -> PureState:
    v = np.array([1.0 + 0j])
    for x in vecs:
        v = np.kron(v, np.asarray(x, dtype=complex))
    return PureState(SubsystemLayout(tuple(len(x) for x in vecs)), v / np.linalg.norm(v))


def random_pure(dims, rng) -> PureState:
    D = int(np.prod(dims))
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return PureState(SubsystemLayout(tuple(dims)), v / np.linalg.norm(v))


@pytest.fixture(scope="session")
def fixture_pcs() -> PCSState:
    """n=3, d=2, uniform W, p=1/2, lambda=0.7."""
    return PCSState(WClassCoefficients.standard_w(3, 2), PCSParams(0.5, 0.7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
