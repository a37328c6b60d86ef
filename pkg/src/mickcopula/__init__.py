"""Minimum-information checkerboard copulas under fixed Kendall's tau or Spearman's rho."""

from .core import (
    BasisCoordinates,
    CheckerboardCopula,
    CopulaValidationError,
    LocalOdds,
    StructuralMatrices,
    anti_comonotone,
    comonotone,
    information,
    kendall_tau,
    local_odds,
    mass_transfer,
    read_copula_csv,
    spearman_rho,
    to_coordinates,
    to_copula,
    transfer_matrix,
    uniform,
    window_arrays,
    write_copula_csv,
)
from .solver import (
    CalibrationError,
    CalibrationResult,
    InfeasibleTargetError,
    SolveReport,
    SolverConfig,
    brute_force_mick,
    calibrate,
    reflect_columns,
    solve_mick,
    solve_mics,
    window_delta,
)

from . import diagnostics, ingest, stats  # noqa: E402

__version__ = "0.1.0"
