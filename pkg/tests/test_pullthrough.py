"""
Test suite for the shifted CG solver and the pull-through identities
"""
import dataclasses

import numpy as np
import pytest

from fock.basis import FockVector
from fock.operators import diagonal
from onebody.modes import CouplingFamily, ModelParams, ModeSet
from pullthrough.formulas import (
    MomentTable,
    ground_state_of_lower_fiber,
    moment_stability,
    moments,
    pull_through_residual,
    pull_through_second_order,
    pull_through_study,
    residuals_decreasing,
)
from pullthrough.shifted_solver import ShiftedSolver
from spectra.analysis import Cutoffs, ground_state_analysis
from utils.errors import NumericalSingularityError, ReasonCode, SolverError


def van_hove_params():
    return ModelParams(eta=0.0, alpha=[0.4, 0.0], coupling=CouplingFamily.uniform(1, [1.0]),
                       modes=ModeSet.uniform([1.0]))


def quartic_params(eta=0.3, amplitudes=(0.3, 0.3)):
    modes = ModeSet.from_rows([(0.8, 1.0, "discrete"), (1.0, 1.0, "essential")])
    return ModelParams(eta=eta, alpha=[0.0, 0.2, 0.0, 0.05],
                       coupling=CouplingFamily.uniform(2, amplitudes), modes=modes)


class TestShiftedSolver:
    """Test CG on F - E + s"""

    def setup_method(self):
        self.op = diagonal(np.array([1.0, 2.0, 3.0]))
        self.b = np.ones(3)

    def test_diagonal_system(self):
        """Test the solution of a diagonal system"""
        solver = ShiftedSolver(self.op, energy=0.5)
        x = solver.solve(self.b, shift=0.5)
        np.testing.assert_allclose(x, [1.0, 0.5, 1.0 / 3.0], rtol=1e-9)
        assert solver.history[-1].success

    def test_many_shifts(self):
        """Test warm-started solves over several shifts"""
        solver = ShiftedSolver(self.op, energy=0.0)
        solutions = solver.solve_many([self.b, self.b], [1.0, 2.0])
        np.testing.assert_allclose(solutions[0], 1.0 / np.array([2.0, 3.0, 4.0]), rtol=1e-9)
        np.testing.assert_allclose(solutions[1], 1.0 / np.array([3.0, 4.0, 5.0]), rtol=1e-9)
        assert len(solver.iteration_counts()) == 2

    def test_zero_source(self):
        """Test b = 0 returns zero without iterating"""
        solver = ShiftedSolver(self.op, energy=0.0)
        np.testing.assert_array_equal(solver.solve(np.zeros(3), shift=1.0), np.zeros(3))
        assert solver.iteration_counts() == (0,)

    def test_iteration_limit(self):
        """Test non-convergence raises SolverError with the mode"""
        solver = ShiftedSolver(self.op, energy=0.0, max_iterations=1)
        with pytest.raises(SolverError) as exc_info:
            solver.solve(self.b, shift=0.0, mode=4)
        assert exc_info.value.diagnostics['mode'] == 4
        assert not solver.history[-1].success

    def test_indefinite_system(self):
        """Test negative curvature raises NumericalSingularityError"""
        solver = ShiftedSolver(self.op, energy=2.5)
        with pytest.raises(NumericalSingularityError) as exc_info:
            solver.solve(self.b, shift=0.0, mode=1)
        assert exc_info.value.mode == 1
        assert exc_info.value.reason_code is ReasonCode.SOLVER_FAILED


class TestPullThroughFirstOrder:
    """Test A_1 psi against the resolvent formula"""

    def test_van_hove(self):
        """Test linear coupling at eta = 0 reproduces A_1 psi"""
        report = pull_through_residual(van_hove_params(), Cutoffs(n_max=20))
        assert report.relative <= 1e-8
        assert report.energy == pytest.approx(-0.16, abs=1e-10)
        assert report.lhs_norms[0] == pytest.approx(0.4, abs=1e-6)

    def test_quartic_study(self):
        """Test the residual is small at the largest cutoff"""
        study = pull_through_study(quartic_params(), [6, 8, 10, 12])
        values = study.relative_residuals()
        assert len(values) == 4
        assert values[-1] <= 1e-6
        assert values[-1] < values[0]
        data = study.to_dict()
        assert [r['n_max'] for r in data['reports']] == [6, 8, 10, 12]
        assert isinstance(data['decreasing'], bool)

    def test_negative_eta_uses_plus_fiber(self):
        """Test the ground state comes from F_{-|eta|} for either sign"""
        for eta in (0.3, -0.3):
            params = quartic_params(eta)
            ground = ground_state_of_lower_fiber(params, Cutoffs(n_max=8))
            report = ground_state_analysis(params, Cutoffs(n_max=8))
            assert ground.energy == pytest.approx(report.e_minus, abs=1e-9)

    def test_free_model(self):
        """Test alpha = 0 makes both sides vanish"""
        params = ModelParams(eta=0.3, alpha=[0.0, 0.0], coupling=CouplingFamily.uniform(1, [0.3, 0.3]),
                             modes=quartic_params().modes)
        first = pull_through_residual(params, Cutoffs(n_max=4))
        assert first.aggregate <= 1e-14
        assert first.moments[1] == pytest.approx(0.0, abs=1e-14)
        second = pull_through_second_order(params, Cutoffs(n_max=4))
        assert second.aggregate <= 1e-14

    def test_phase_and_scale_invariance(self):
        """Test the relative residual ignores a global phase and a rescaling of psi"""
        params = quartic_params()
        ground = ground_state_of_lower_fiber(params, Cutoffs(n_max=8))
        reference = pull_through_residual(params, Cutoffs(n_max=8), ground=ground)
        for factor in (np.exp(0.7j), 3.0, -0.25 * np.exp(2.1j)):
            psi = FockVector(factor * ground.psi.coefficients, ground.basis)
            report = pull_through_residual(params, Cutoffs(n_max=8),
                                           ground=dataclasses.replace(ground, psi=psi))
            assert report.relative == pytest.approx(reference.relative, rel=1e-6, abs=1e-13)
            assert report.moments[1] == pytest.approx(reference.moments[1], rel=1e-12)

    def test_decreasing_rule(self):
        """Test the schedule rule tolerates plateaus below the noise floor only"""
        assert residuals_decreasing([3e-3, 2.7e-4, 1.6e-4, 2.4e-5])
        assert residuals_decreasing([1e-4])
        assert not residuals_decreasing([1e-4, 2e-4])
        assert residuals_decreasing([1e-8, 5e-10, 8e-10])
        assert not residuals_decreasing([1e-8, 5e-10, 8e-9])

    def test_report_serializes(self):
        """Test the report dict carries plain values"""
        data = pull_through_residual(quartic_params(), Cutoffs(n_max=6)).to_dict()
        assert len(data['residuals']) == 2
        assert set(data['moments']) == {'1', '2'}


class TestPullThroughSecondOrder:
    """Test A_2 psi against the two-shift formula"""

    def test_van_hove(self):
        """Test the second-order identity for linear coupling"""
        report = pull_through_second_order(van_hove_params(), Cutoffs(n_max=20))
        assert report.relative <= 1e-7
        assert report.residuals.shape == (1, 1)

    def test_quartic_symmetric_storage(self):
        """Test (k, q) and (q, k) share one formula value"""
        report = pull_through_second_order(quartic_params(), Cutoffs(n_max=10))
        assert set(report.upper) == {(0, 0), (0, 1), (1, 1)}
        np.testing.assert_array_equal(report.at(1, 0), report.at(0, 1))
        np.testing.assert_allclose(report.residuals, report.residuals.T, atol=1e-12)

    def test_quartic_convergence(self):
        """Test the residual decreases along the cutoffs and is small at N_max = 16"""
        values = [pull_through_second_order(quartic_params(), Cutoffs(n_max=n)).relative
                  for n in (8, 12, 16)]
        assert residuals_decreasing(values)
        assert values[-1] <= 1e-6


class TestMoments:
    """Test number moments of the ground state"""

    def test_van_hove_occupation(self):
        """Test <N> = alpha_1^2 ||omega^{-1} f||^2"""
        ground = ground_state_of_lower_fiber(van_hove_params(), Cutoffs(n_max=20))
        values = moments(ground.psi, (1, 2))
        assert values[1] == pytest.approx(0.16, abs=1e-8)
        # Poisson: <N^2> = <N> + <N>^2
        assert values[2] == pytest.approx(0.16 + 0.16 ** 2, abs=1e-8)

    def test_moment_plateau(self):
        """Test converged moments are not flagged"""
        table = moment_stability(van_hove_params(), [10, 15, 20])
        assert table.growth == {1: False, 2: False}
        assert table.reason is None
        assert len(table.values[1]) == 3

    def test_growth_reason(self):
        """Test flagged growth maps to the moment_growth reason"""
        table = MomentTable(n_max_values=[4, 6, 8], values={1: [1.0, 2.0, 4.0]}, growth={1: True})
        assert table.reason is ReasonCode.MOMENT_GROWTH
        assert table.to_dict()['growth'] == {'1': True}
