"""Terminating-time rules for the denoising iteration.

Three rules are provided: a frequency-domain threshold on the relative
change of high-frequency energy per step, a Morozov-style discrepancy
principle against the noisy data, and an a-priori time horizon T(delta).
A fourth pseudo-rule runs until the step budget is exhausted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .grid import ImageGrid


@dataclass(frozen=True)
class RdeStop:
    """Stop once the relative change of high-frequency energy drops below tolerance.

    ``n0`` overrides the band threshold explicitly.  By default the
    threshold is the fraction ``n0_fraction`` of the full anti-diagonal
    index range, floor(n0_fraction * (M + N - 1)).  ``literal_formula``
    selects floor(0.6 * N^2) instead, which exceeds the largest index pair
    sum on all but tiny grids and then degenerates to an empty band.
    """

    tolerance: float
    n0: int | None = None
    n0_fraction: float = 0.6
    literal_formula: bool = False

    def __post_init__(self):
        if not (self.tolerance > 0):
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")

    def band_threshold(self, rows: int, cols: int) -> int:
        if self.n0 is not None:
            return int(self.n0)
        if self.literal_formula:
            return int(math.floor(0.6 * cols * cols))
        return int(math.floor(self.n0_fraction * (rows + cols - 1)))


@dataclass(frozen=True)
class DiscrepancyStop:
    """Stop at the first step whose relative distance to the data reaches delta."""

    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ParameterError(f"delta must be non-negative, got {self.delta}")


@dataclass(frozen=True)
class AprioriStop:
    """Stop at the first step whose accumulated time reaches T(delta)."""

    c1: float
    c2: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0 and self.gamma > 0):
            raise ParameterError("c1, c2 and gamma must be positive")
        if self.delta < 0:
            raise ParameterError(f"delta must be non-negative, got {self.delta}")

    def horizon(self) -> float:
        return a_priori_T(self.delta, self.c1, self.c2, self.gamma)


@dataclass(frozen=True)
class MaxStepsOnly:
    """No early termination; the step budget alone ends the run."""


StoppingRule = RdeStop | DiscrepancyStop | AprioriStop | MaxStepsOnly


def high_freq_energy(u: ImageGrid | np.ndarray, n0: int) -> float:
    """Sum of squared DFT magnitudes over index pairs with i + j >= n0.

    Unnormalised forward transform, 0-based indices, no frequency
    centering.  n0 = 0 therefore returns M*N times the squared pixel norm
    (Parseval); n0 beyond the largest index sum gives an empty band and 0.
    """
    px = u.pixels if isinstance(u, ImageGrid) else np.asarray(u, dtype=np.float64)
    if n0 < 0:
        raise ParameterError(f"n0 must be non-negative, got {n0}")
    m, n = px.shape
    if n0 > (m - 1) + (n - 1):
        return 0.0
    spectrum = np.abs(np.fft.fft2(px)) ** 2
    band = np.add.outer(np.arange(m), np.arange(n)) >= n0
    return float(spectrum[band].sum())


def rde(u_k: ImageGrid, u_km1: ImageGrid, n0: int) -> float:
    """Relative change of high-frequency energy between consecutive iterates.

    A zero previous-step energy is a degenerate signal; it is reported as
    0.0 so that any threshold treats it as "stop".
    """
    if u_k.shape != u_km1.shape:
        raise ParameterError(f"shape mismatch: {u_k.shape} vs {u_km1.shape}")
    prev = high_freq_energy(u_km1, n0)
    cur = high_freq_energy(u_k, n0)
    if prev == 0.0:
        return 0.0
    return abs(cur - prev) / prev


@dataclass(frozen=True)
class DiscrepancyResult:
    sigma: float
    chi: float
    fired: bool


def discrepancy(u_k: np.ndarray, u0: np.ndarray, delta: float) -> DiscrepancyResult:
    """Tolerability ratio sigma = ||u - u0|| / ||u0|| and its excess over delta."""
    u_k = np.asarray(u_k, dtype=np.float64).ravel()
    u0 = np.asarray(u0, dtype=np.float64).ravel()
    denom = np.linalg.norm(u0)
    if denom == 0.0:
        raise DegenerateInputError("noisy data has zero norm")
    sigma = float(np.linalg.norm(u_k - u0) / denom)
    chi = sigma - delta
    return DiscrepancyResult(sigma=sigma, chi=chi, fired=chi >= 0.0)


def a_priori_T(delta: float, c1: float, c2: float, gamma: float) -> float:
    """Terminating time T = c1 * ln(1 + c2 * delta^gamma); T(0) = 0."""
    if not (c1 > 0 and c2 > 0 and gamma > 0):
        raise ParameterError("c1, c2 and gamma must be positive")
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    return float(c1 * math.log1p(c2 * delta**gamma))
