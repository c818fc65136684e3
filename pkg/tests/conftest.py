import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from fock import StateSpec, build_state  # noqa: E402
from homodyne import detector_params  # noqa: E402
from phasespace import QuadratureGrid, smooth, wigner_grid  # noqa: E402

TEST_STATES = {
    "vacuum": StateSpec.vacuum(),
    "fock1": StateSpec.fock(1),
    "fock2": StateSpec.fock(2),
    "coherent1.5": StateSpec.coherent(1.5),
    "cat1.5": StateSpec.cat(1.5, 0.0),
    "thermal0.5": StateSpec.thermal(0.5),
    "squeezed0.3": StateSpec.squeezed_vacuum(0.3),
}

EFFICIENCIES = (0.6, 0.8, 1.0)
EFFICIENCY_PAIRS = [(e1, e2) for e1 in EFFICIENCIES for e2 in EFFICIENCIES]


@pytest.fixture(scope="session")
def grid():
    return QuadratureGrid(-8.0, 8.0, 0.05)


@pytest.fixture(scope="session")
def states():
    return {name: build_state(spec, 64) for name, spec in TEST_STATES.items()}


@pytest.fixture(scope="session")
def wigner_of(states, grid):
    """Cached Wigner fields on the default grid, keyed by test-state name."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = wigner_grid(states[name], grid)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def g_of(wigner_of):
    """Cached G fields for (state name, eta1, eta2)."""
    cache = {}

    def get(name, eta1, eta2):
        key = (name, eta1, eta2)
        if key not in cache:
            cache[key] = smooth(wigner_of(name), detector_params(eta1, eta2).widths)
        return cache[key]

    return get
