"""p-Laplacian damped-flow image denoising.

A regularised p-Laplacian diffusion driven as a damped second-order flow,
integrated with a damped Stormer-Verlet scheme under spectral step-size
control, with frequency-domain and discrepancy stopping rules and
SSIM-based evaluation against a first-order diffusion baseline.
"""

from ._accel import USING_NUMBA
from .diffusivity import (
    BoundsReport,
    DiffusivityField,
    GaussianKernel,
    check_bounds,
    diffusivity_half,
    grad_gaussian,
    h1_norm,
    make_kernel,
)
from .errors import (
    DegenerateInputError,
    DimensionError,
    DivergenceError,
    FormatError,
    ParameterError,
    SvddfError,
)
from .flow import (
    FlowState,
    SolverConfig,
    TrajectoryLog,
    TrajectoryRecord,
    energies,
    initial_state,
    run_first_order,
    run_svddf,
    step_size,
    sv_step,
)
from .grid import ImageGrid, NoiseSpec, add_noise, array, rel_l2, synth_image, vec
from .metrics import EvalReport, SsimConfig, evaluate, ssim
from .pgm import read_pgm, write_pgm
from .stencil import (
    SparseOperator,
    SpectralBound,
    apply,
    assemble,
    dump_coo,
    gershgorin_bound,
    lambda_max,
    spectrum_check,
    to_dense,
)
from .stopping import (
    AprioriStop,
    DiscrepancyStop,
    DiscrepancyResult,
    MaxStepsOnly,
    RdeStop,
    StoppingRule,
    a_priori_T,
    discrepancy,
    high_freq_energy,
    rde,
)

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "AprioriStop",
    "BoundsReport",
    "DegenerateInputError",
    "DiffusivityField",
    "DimensionError",
    "DiscrepancyResult",
    "DiscrepancyStop",
    "DivergenceError",
    "EvalReport",
    "FlowState",
    "FormatError",
    "GaussianKernel",
    "ImageGrid",
    "MaxStepsOnly",
    "NoiseSpec",
    "ParameterError",
    "RdeStop",
    "SolverConfig",
    "SparseOperator",
    "SpectralBound",
    "SsimConfig",
    "StoppingRule",
    "SvddfError",
    "TrajectoryLog",
    "TrajectoryRecord",
    "a_priori_T",
    "add_noise",
    "apply",
    "array",
    "assemble",
    "check_bounds",
    "diffusivity_half",
    "discrepancy",
    "dump_coo",
    "energies",
    "evaluate",
    "gershgorin_bound",
    "grad_gaussian",
    "h1_norm",
    "high_freq_energy",
    "initial_state",
    "lambda_max",
    "make_kernel",
    "rde",
    "read_pgm",
    "rel_l2",
    "run_first_order",
    "run_svddf",
    "spectrum_check",
    "ssim",
    "step_size",
    "sv_step",
    "synth_image",
    "to_dense",
    "vec",
    "write_pgm",
]
