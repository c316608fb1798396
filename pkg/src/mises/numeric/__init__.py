"""Numeric cross-validation of the transformations."""

from .checks import VerificationReport, check_characteristic_property, check_prandtl
from .eta import EtaField, MonotonicityError, build_eta, closure_deviation, residual_exact, residual_field
from .mol import Grid, GridError, NumericSolution, SolverError, solve_mol
from .suites import SUITES, suite_passed

__all__ = [
    "EtaField", "Grid", "GridError", "MonotonicityError", "NumericSolution", "SUITES", "SolverError",
    "VerificationReport", "build_eta", "check_characteristic_property", "check_prandtl",
    "closure_deviation", "residual_exact", "residual_field", "solve_mol", "suite_passed",
]
