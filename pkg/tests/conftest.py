import sys
from pathlib import Path

import pytest

from qubit_capacity import (
    identity_channel,
    make_amplitude_damping,
    make_shifted_depolarizing,
    make_squeezed,
    make_stretched,
    optimize_global,
    optimize_shannon,
)

sys.path.insert(0, str(Path(__file__).parent))

CHANNELS = {
    "depolarizing": lambda: make_shifted_depolarizing(0.5),
    "amplitude_damping": lambda: make_amplitude_damping(0.5),
    "stretched": lambda: make_stretched(0.5, 0.6),
    "stretched_08": lambda: make_stretched(0.8, 0.84),
    "squeezed": lambda: make_squeezed(0.5, 0.435),
    "identity": identity_channel,
}


class _Cache:
    """Optimizer results shared across the session; each is computed at most once."""

    def __init__(self):
        self._global = {}
        self._shannon = {}

    def channel(self, name):
        return CHANNELS[name]()

    def global_result(self, name):
        if name not in self._global:
            self._global[name] = optimize_global(self.channel(name), seed=0)
        return self._global[name]

    def shannon_result(self, name):
        if name not in self._shannon:
            self._shannon[name] = optimize_shannon(self.channel(name), seed=0)
        return self._shannon[name]


@pytest.fixture(scope="session")
def results():
    return _Cache()


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
