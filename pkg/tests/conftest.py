import numpy as np
import pytest

from graddivbox.grid import Field, GridSpec, dealias, zero_mean

TWO_PI = 2.0 * np.pi

# one "[acceptance] criterion N <name>: PASS/FAIL" line per gate criterion,
# replayed after the test summary so fd-level capture cannot swallow them
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def grid2d():
    return GridSpec(dim=2, n=32, box_length=TWO_PI)


@pytest.fixture
def grid3d():
    return GridSpec(dim=3, n=16, box_length=TWO_PI)


def coords(grid):
    """Meshgrid of sample coordinates, ij indexing."""
    x = np.arange(grid.n) * grid.spacing
    return np.meshgrid(*([x] * grid.dim), indexing="ij")


def random_state_field(grid, seed=0):
    """Zero-mean, dealiased random vector field (the model's state space)."""
    rng = np.random.default_rng(seed)
    u = Field.from_physical(grid, rng.standard_normal((grid.dim,) + grid.shape))
    return dealias(zero_mean(u))


def shear_field(grid, amplitude=1.0):
    """(amplitude * sin(2 pi y / L), 0[, 0]): divergence-free unidirectional shear."""
    xs = coords(grid)
    scale = TWO_PI / grid.box_length
    comps = [amplitude * np.sin(scale * xs[1])] + [np.zeros(grid.shape)] * (grid.dim - 1)
    return Field.from_physical(grid, np.stack(comps))
