"""Robust principal component analysis with side information and features."""

from .errors import (
    DimensionError,
    FactorizationError,
    FormatError,
    InvalidInputError,
    RankDeficientError,
    SirpcaError,
    UndefinedCriterionError,
)
from .matops import norms, orthonormalize, rank, shrink, shrink_matrix, svd, svt
from .solvers import (
    Decomposition,
    FeaturePair,
    SolverConfig,
    solve_pcp,
    solve_pcpf,
    solve_pcps,
    solve_pcpsf,
    solve_raps,
    solve_subtract_baseline,
)
from .synth import RngSpec, assemble_instance, benchmark_instance
from .bench import run_param_sweep, run_phase_grid, success

__version__ = "0.1.0"
