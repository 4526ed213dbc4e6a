"""Eigensolvers, analytic bounds and the ground/excited-state analysis layer"""
from spectra.eigensolver import METHODS, LanczosSolver, SpectralResult, degeneracy, eigensolve, residual_norms
from spectra.bounds import (
    VanHoveTarget,
    interaction_lower_bound,
    lower_bound_polynomials,
    polynomial_minimum,
    van_hove_closed_form,
)
from spectra.analysis import (
    ConvergenceRow,
    ConvergenceTable,
    Cutoffs,
    ExcitedStateCheck,
    GroundStateReport,
    HvzEntry,
    HvzReport,
    convergence_study,
    excited_state_check,
    ground_state_analysis,
    hvz_threshold_diagnostic,
)

__all__ = [
    'METHODS',
    'LanczosSolver',
    'SpectralResult',
    'degeneracy',
    'eigensolve',
    'residual_norms',
    'VanHoveTarget',
    'interaction_lower_bound',
    'lower_bound_polynomials',
    'polynomial_minimum',
    'van_hove_closed_form',
    'ConvergenceRow',
    'ConvergenceTable',
    'Cutoffs',
    'ExcitedStateCheck',
    'GroundStateReport',
    'HvzEntry',
    'HvzReport',
    'convergence_study',
    'excited_state_check',
    'ground_state_analysis',
    'hvz_threshold_diagnostic',
]
