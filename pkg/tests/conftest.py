import numpy as np
import pytest

from rabidephase.scenario import preset, run_scenario

_RUNS = {}
ACCEPTANCE_LINES = []


def preset_run(name):
    """Exact + effective run of a figure preset, computed once per session."""
    if name not in _RUNS:
        _RUNS[name] = run_scenario(preset(name), write=False)
    return _RUNS[name]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_density(rng, n_max, rank=None):
    """Random full-rank (or given rank) density state as a full matrix."""
    dim = 2 * (n_max + 1)
    rank = rank or dim
    x = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = x @ x.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
