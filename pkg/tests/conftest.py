import numpy as np
import pytest

import svddf


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every jitted kernel once so compile time stays out of timed tests."""
    g = svddf.synth_image("disk", 12, 12)
    k = svddf.make_kernel(1.0)
    fld = svddf.diffusivity_half(g, 1e-2, 1.0, k)
    op = svddf.assemble(fld, 1.0)
    svddf.apply(op, np.ones(op.dim))
    svddf.ssim(g, g, svddf.SsimConfig(window=5))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_grid(rng, rows, cols, lo=0.0, hi=1.0, spacing=1.0):
    return svddf.ImageGrid(rng.uniform(lo, hi, size=(rows, cols)), spacing=spacing)


def random_field(rng, rows, cols, p=1.0, epsilon=1e-2, sigma=1.0):
    grid = random_grid(rng, rows, cols)
    return svddf.diffusivity_half(grid, epsilon, p, svddf.make_kernel(sigma))
