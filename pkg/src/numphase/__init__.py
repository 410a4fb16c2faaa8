"""Number-phase uncertainty on truncated weighted Bergman spaces."""

__version__ = "0.1.0"

from .specfun import SeriesError, SeriesResult, WeightParam, g_factor, log_gamma, series_I
from .hilbert import (
    CoeffState, OperatorMatrix, apply_number, apply_phase, apply_phase_adjoint,
    basis_state, commutator_residual, default_truncation, inner,
)
from .states import (
    NormalizationConstant, StateParams, TruncationError, build_shifted_state,
    build_state, hardy_limit_state, normalization,
)
from .moments import (
    MomentReport, consistency_residual, consistency_series, cs_bound,
    expectation, report, variance,
)
from .optimize import (
    FitResult, OptimizeResult, OptimizeSettings, fit_params, minimize_gap, scan_family,
)
