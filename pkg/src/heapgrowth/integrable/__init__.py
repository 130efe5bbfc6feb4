"""Exactly checkable structures: Toda flows, tau functions, Painleve II, sl_3, Anderson."""

from .anderson import AndersonReport, anderson_duality_check, anderson_matrix, random_potential
from .exact import ExpPoly, GaussianRational, RationalPoly, determinant, fraction_str
from .lie import LieReport, lie_checks
from .painleve import GaugeReport, painleve2_check, sigma_gauge_check, yablonskii
from .tau import TauTable, bilinear_residual, positions, tau_from_phi
from .toda import (
    ChainBoundary,
    IsospectralReport,
    TodaState,
    TodaTrajectory,
    hamiltonian,
    isospectrality_check,
    lax_matrix,
    monodromy_trace,
    time_reversal_error,
    toda_integrate,
    toda_rhs,
)

__all__ = [
    "AndersonReport", "anderson_duality_check", "anderson_matrix", "random_potential",
    "ExpPoly", "GaussianRational", "RationalPoly", "determinant", "fraction_str",
    "LieReport", "lie_checks",
    "GaugeReport", "painleve2_check", "sigma_gauge_check", "yablonskii",
    "TauTable", "bilinear_residual", "positions", "tau_from_phi",
    "ChainBoundary", "IsospectralReport", "TodaState", "TodaTrajectory", "hamiltonian",
    "isospectrality_check", "lax_matrix", "monodromy_trace", "time_reversal_error",
    "toda_integrate", "toda_rhs",
]
