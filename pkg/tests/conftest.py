import numpy as np
import pytest

from icesync.forcing import insolation, sinusoid
from icesync.integrator import IntegratorConfig
from icesync.oscillator import OscillatorParams


@pytest.fixture
def base_params():
    return OscillatorParams()


@pytest.fixture
def sine_locked():
    """2:1 locking setup: unit 41-kyr sine, gamma 3.33, T_ULC about 100 kyr."""
    return OscillatorParams(gamma=3.33, tau=35.09), sinusoid()


@pytest.fixture
def astro_three():
    """Three-AT setup: normalized insolation, gamma 0.75, T_ULC about 125 kyr."""
    return OscillatorParams(gamma=0.75, tau=43.86), insolation()


@pytest.fixture
def fine():
    return IntegratorConfig(h=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Record one pass/fail line per acceptance criterion."""
    def _report(name: str, ok: bool, detail: str, elapsed: float | None = None):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        if elapsed is not None:
            line += f" [{elapsed:.1f} s]"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
