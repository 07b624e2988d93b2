import numpy as np
import pytest

from bohmrotor.grid import (Representation, WaveField, make_grid, transform)

PAPER_HBAR = 2 * np.pi * 43 / 4096
DESK_HBAR = 2 * np.pi * 11 / 1024


def smooth_field(n1, n2, hbar, seed=3, kmax=4, decay=0.6, dc=10.0):
    """Node-free band-limited random field for oracle comparisons."""
    rng = np.random.default_rng(seed)
    g = make_grid(n1, n2, hbar)
    mom = np.zeros((n1, n2), complex)
    for a in range(-kmax, kmax + 1):
        for b in range(-kmax, kmax + 1):
            mom[a % n1, b % n2] = ((rng.normal() + 1j * rng.normal())
                                   * np.exp(-decay * (a * a + b * b)))
    mom[0, 0] += dc
    mom /= np.sqrt(np.sum(np.abs(mom) ** 2))
    field = WaveField(g, mom, Representation.MOMENTUM)
    return g, transform(field, Representation.POSITION)


def random_field(n1, n2, hbar, seed=0):
    """Normalized fully random field (has near-nodes)."""
    rng = np.random.default_rng(seed)
    g = make_grid(n1, n2, hbar)
    amps = rng.normal(size=(n1, n2)) + 1j * rng.normal(size=(n1, n2))
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return g, WaveField(g, amps, Representation.POSITION)


@pytest.fixture
def desk_grid():
    return make_grid(1024, 128, DESK_HBAR)
