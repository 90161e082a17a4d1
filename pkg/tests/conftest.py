from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from multistop import Contract, LevyModel, RefractionSpec, reference_model

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def ref_model() -> LevyModel:
    return reference_model()


@pytest.fixture
def two_sided() -> LevyModel:
    """Reference model plus Exp(3) up jumps at rate 1."""
    return LevyModel(drift=0.36, sigma=0.2, down_jump_rate=1.0, down_mix=((1.0, 1.0),),
                     up_jump_rate=1.0, up_mix=((1.0, 3.0),))


@pytest.fixture
def rich_model() -> LevyModel:
    """Two down and two up components; admissible for calls at alpha = -0.02."""
    return LevyModel(drift=-0.2, sigma=0.3, down_jump_rate=0.8, down_mix=((0.4, 1.5), (0.6, 4.0)),
                     up_jump_rate=0.5, up_mix=((0.7, 2.5), (0.3, 6.0)))


@pytest.fixture
def ref_contract() -> Contract:
    return Contract(strike=50.0, alpha=-0.02, n_exercises=5)


@pytest.fixture
def unit_refraction() -> RefractionSpec:
    return RefractionSpec.from_mean(1.0)


@pytest.fixture
def log50() -> float:
    return math.log(50.0)


@pytest.fixture
def acceptance():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
