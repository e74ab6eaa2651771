"""Exact star discrepancy, windowed discrepancy envelopes and the variational
lower bound for the one-dimensional star discrepancy constant."""

from .bounds import c_of_a, optimize_constant, p_chain_check, range_split_inequality, verify_bound
from .discrepancy import DiscrepancyProfile, count_below, disc_function, profile, star_discrepancy
from .envelope import WindowScheme, f_function, g_function, jump_census, p_integral, window_envelope
from .errors import ConstructionError, DiscLabError, IngestionError, InvalidParameterError, RangeError
from .piecewise import PiecewiseLinear
from .points import GeneratorSpec, PointSet, generate, kronecker, read_points, van_der_corput
from .variational import (
    AdmissibleParams,
    SegmentSpec,
    assemble_extremal,
    check_admissible,
    check_condition_A,
    chi_lower_bound,
    oracle_minimize,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleParams", "ConstructionError", "DiscLabError", "DiscrepancyProfile",
    "GeneratorSpec", "IngestionError", "InvalidParameterError", "PiecewiseLinear",
    "PointSet", "RangeError", "SegmentSpec", "WindowScheme", "assemble_extremal",
    "c_of_a", "check_admissible", "check_condition_A", "chi_lower_bound", "count_below",
    "disc_function", "f_function", "g_function", "generate", "jump_census", "kronecker",
    "optimize_constant", "oracle_minimize", "p_chain_check", "p_integral", "profile",
    "range_split_inequality", "read_points", "star_discrepancy", "van_der_corput",
    "verify_bound", "window_envelope",
]
