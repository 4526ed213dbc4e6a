"""Pull-through identities and number-moment stability of fiber ground states"""
from pullthrough.shifted_solver import ShiftedSolver, SolveInfo
from pullthrough.formulas import (
    GroundState,
    MomentTable,
    PullThroughReport,
    PullThroughStudy,
    SecondOrderReport,
    ground_state_of_lower_fiber,
    moment_stability,
    moments,
    pull_through_residual,
    pull_through_second_order,
    pull_through_study,
    residuals_decreasing,
)

__all__ = [
    'ShiftedSolver',
    'SolveInfo',
    'GroundState',
    'MomentTable',
    'PullThroughReport',
    'PullThroughStudy',
    'SecondOrderReport',
    'ground_state_of_lower_fiber',
    'moment_stability',
    'moments',
    'pull_through_residual',
    'pull_through_second_order',
    'pull_through_study',
    'residuals_decreasing',
]
