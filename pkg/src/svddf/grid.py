"""Image lattice, column stacking, synthetic fixtures and the noise model.

An image lives on a uniform M x N pixel lattice with grid step ``spacing``.
Intensities are plain float64 and are normalised to [0, 1] when ingested
from files; in-memory operations may step outside that range (noise can
push values slightly above 1).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError, ParameterError

KINDS = ("piecewise-constant", "ramp", "disk")


@dataclass(frozen=True)
class ImageGrid:
    """Immutable M x N real-valued image on a uniform lattice."""

    pixels: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise DimensionError(f"pixels must be 2-D, got ndim={px.ndim}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionError(f"grid must be at least 1x1, got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ParameterError("pixels contain non-finite values")
        if not (self.spacing > 0):
            raise ParameterError(f"spacing must be positive, got {self.spacing}")
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self):
        return self.pixels.shape

    def require_min_size(self, n: int = 2) -> "ImageGrid":
        """Raise unless both dimensions are at least ``n`` (solvers need neighbours)."""
        if self.rows < n or self.cols < n:
            raise DimensionError(f"operation needs a grid of at least {n}x{n}, got {self.shape}")
        return self


@dataclass(frozen=True)
class NoiseSpec:
    """Relative level and seed of the multiplicative uniform noise model."""

    delta: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.delta < 1.0):
            raise ParameterError(f"delta must lie in [0, 1), got {self.delta}")


def vec(grid: ImageGrid) -> np.ndarray:
    """Stack the columns of the image into a length-MN vector.

    Column-major order: entry q = j*M + i (0-based) holds pixel (i, j), so
    the first M entries are the first column top to bottom.
    """
    return grid.pixels.flatten(order="F")


def array(values: np.ndarray, rows: int, cols: int, spacing: float = 1.0) -> ImageGrid:
    """Inverse of :func:`vec`: rebuild the M x N image from a stacked vector."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionError(f"expected a flat vector of length {rows * cols}, got shape {v.shape}")
    return ImageGrid(v.reshape((rows, cols), order="F"), spacing=spacing)


def add_noise(clean: ImageGrid, spec: NoiseSpec) -> ImageGrid:
    """Multiply each pixel by an independent factor uniform in [1-delta, 1+delta].

    Deterministic for a fixed seed; the elementwise bound
    ``|noisy - clean| <= delta * |clean|`` always holds.
    """
    rng = np.random.default_rng(spec.seed)
    factor = 1.0 + spec.delta * (2.0 * rng.random(clean.shape) - 1.0)
    return ImageGrid(clean.pixels * factor, spacing=clean.spacing)


def synth_image(kind: str, rows: int, cols: int, spacing: float = 1.0) -> ImageGrid:
    """Deterministic test image with known edges.

    ``piecewise-constant``: left half 0.25, right half 0.75.
    ``ramp``: u(i, j) = j / (cols - 1).
    ``disk``: indicator of the centred disk of radius min(rows, cols) / 4.
    """
    if rows < 2 or cols < 2:
        raise DimensionError(f"synthetic images need at least 2x2, got {rows}x{cols}")
    if kind == "piecewise-constant":
        px = np.full((rows, cols), 0.25)
        px[:, cols // 2 :] = 0.75
    elif kind == "ramp":
        px = np.tile(np.arange(cols, dtype=np.float64) / (cols - 1), (rows, 1))
    elif kind == "disk":
        ci, cj = (rows - 1) / 2.0, (cols - 1) / 2.0
        radius = min(rows, cols) / 4.0
        ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        px = ((ii - ci) ** 2 + (jj - cj) ** 2 <= radius**2).astype(np.float64)
    else:
        raise ParameterError(f"unknown synthetic image kind {kind!r}; choose from {KINDS}")
    return ImageGrid(px, spacing=spacing)


def rel_l2(u: np.ndarray, ref: np.ndarray) -> float:
    """Relative Euclidean distance ||u - ref||_2 / ||ref||_2."""
    u = np.asarray(u, dtype=np.float64).ravel()
    ref = np.asarray(ref, dtype=np.float64).ravel()
    if u.shape != ref.shape:
        raise DimensionError(f"length mismatch: {u.shape} vs {ref.shape}")
    denom = np.linalg.norm(ref)
    if denom == 0.0:
        raise DegenerateInputError("reference vector has zero norm")
    return float(np.linalg.norm(u - ref) / denom)
