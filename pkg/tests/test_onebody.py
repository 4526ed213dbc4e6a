"""
Test suite for the one-boson layer: modes, couplings, hypotheses
"""
import numpy as np
import pytest

from onebody.hypotheses import leading_terms, phase_function, validate_hypotheses
from onebody.modes import (
    CouplingFamily,
    ModelParams,
    ModeSet,
    ModeTag,
    coupled_support,
    infrared_norm,
    inner_product,
    masses,
)
from utils.errors import DimensionError


def quartic_params(eta=0.3, amplitudes=(0.5, 0.5)):
    modes = ModeSet.from_rows([(0.8, 1.0, "discrete"), (1.0, 0.5, "essential")])
    return ModelParams(eta=eta, alpha=[0.0, 0.2, 0.0, 0.05],
                       coupling=CouplingFamily.uniform(2, amplitudes), modes=modes)


class TestModeSet:
    """Test mode grids"""

    def setup_method(self):
        self.modes = ModeSet.from_rows([(0.8, 1.0, "discrete"), (1.0, 0.5, "essential"),
                                        (1.5, 0.25, "essential")])

    def test_from_rows(self):
        """Test construction from (energy, weight, tag) rows"""
        assert self.modes.count == 3
        assert self.modes.tags[0] is ModeTag.DISCRETE
        assert self.modes.essential_indices == [1, 2]

    def test_masses(self):
        """Test m and m_ess"""
        assert masses(self.modes) == (0.8, 1.0)
        discrete_only = ModeSet.uniform([0.5, 2.0], tag=ModeTag.DISCRETE)
        m, m_ess = masses(discrete_only)
        assert m == 0.5
        assert np.isinf(m_ess)

    def test_nonpositive_energy_names_mode(self):
        """Test that omega_k <= 0 is rejected with the mode index"""
        with pytest.raises(ValueError, match="mode 1"):
            ModeSet.from_rows([(1.0, 1.0, "essential"), (0.0, 1.0, "essential")])

    def test_mismatched_lengths(self):
        """Test per-mode arrays must agree"""
        with pytest.raises(DimensionError):
            ModeSet(energies=[1.0, 2.0], weights=[1.0], tags=(ModeTag.ESSENTIAL, ModeTag.ESSENTIAL))

    def test_subset_keeps_order(self):
        """Test restriction to a subset of modes"""
        sub = self.modes.subset([2, 0])
        np.testing.assert_array_equal(sub.energies, [1.5, 0.8])
        assert sub.tags == (ModeTag.ESSENTIAL, ModeTag.DISCRETE)

    def test_arrays_are_read_only(self):
        """Test mode arrays cannot be mutated in place"""
        with pytest.raises(ValueError):
            self.modes.energies[0] = 2.0


class TestInnerProducts:
    """Test weighted one-boson geometry"""

    def setup_method(self):
        self.modes = ModeSet.from_rows([(1.0, 2.0, "essential"), (4.0, 0.5, "essential")])

    def test_inner_product_is_conjugate_linear_in_first(self):
        """Test <g, h> = sum conj(g) h w"""
        g = np.array([1j, 1.0])
        h = np.array([1.0, 2.0])
        assert inner_product(g, h, self.modes) == pytest.approx(-2j + 1.0)

    def test_infrared_norm(self):
        """Test ||omega^{-p} g||"""
        g = np.array([1.0, 2.0])
        expected = np.sqrt(1.0 * 2.0 + 4.0 / 4.0 * 0.5)
        assert infrared_norm(g, self.modes, 0.5) == pytest.approx(expected)
        expected_one = np.sqrt(1.0 * 2.0 + 4.0 / 16.0 * 0.5)
        assert infrared_norm(g, self.modes, 1.0) == pytest.approx(expected_one)

    def test_wrong_length(self):
        """Test amplitude count must match the mode count"""
        with pytest.raises(DimensionError):
            inner_product([1.0], [1.0, 2.0], self.modes)


class TestCouplingFamily:
    """Test coupling families and model parameters"""

    def test_uniform_and_indexing(self):
        """Test f_i is 1-based and uniform families repeat one vector"""
        family = CouplingFamily.uniform(2, [0.5, 0.25])
        assert family.vectors.shape == (4, 2)
        np.testing.assert_array_equal(family.f(4), [0.5, 0.25])
        with pytest.raises(IndexError):
            family.f(5)

    def test_wrong_vector_count(self):
        """Test a family of order n needs 2n vectors"""
        with pytest.raises(DimensionError):
            CouplingFamily(order=2, vectors=np.ones((3, 2)))

    def test_with_support(self):
        """Test 1_A f zeroes amplitudes outside A"""
        family = CouplingFamily.uniform(1, [0.5, 0.25, 0.1]).with_support([1])
        np.testing.assert_array_equal(family.f(1), [0.0, 0.25, 0.0])
        assert coupled_support(family) == [1]

    def test_alpha_length_checked(self):
        """Test alpha needs 2n entries"""
        with pytest.raises(DimensionError):
            ModelParams(eta=0.0, alpha=[1.0], coupling=CouplingFamily.uniform(1, [1.0]),
                        modes=ModeSet.uniform([1.0]))

    def test_variants_are_new_objects(self):
        """Test with_eta / scaled leave the original untouched"""
        params = quartic_params()
        scaled = params.scaled(2.0)
        np.testing.assert_allclose(scaled.alpha, [0.0, 0.4, 0.0, 0.1])
        np.testing.assert_allclose(params.alpha, [0.0, 0.2, 0.0, 0.05])
        assert params.with_eta(-0.1).eta == -0.1
        assert params.eta == 0.3

    def test_digest(self):
        """Test the parameter hash is stable and sensitive to eta"""
        assert quartic_params().digest() == quartic_params().digest()
        assert quartic_params().digest() != quartic_params(eta=0.31).digest()


class TestHypotheses:
    """Test leading terms, phase functions and Hypotheses 1-5"""

    def test_leading_terms_uniform(self):
        """Test equal f's leave only 2n leading"""
        assert leading_terms(CouplingFamily.uniform(2, [0.5, 0.5])) == frozenset({4})

    def test_leading_terms_distinct(self):
        """Test distinct f's make every index from 2 leading"""
        vectors = np.array([[1.0], [2.0], [3.0], [4.0]])
        assert leading_terms(CouplingFamily(order=2, vectors=vectors)) == frozenset({2, 3, 4})

    def test_quartic_passes_all(self):
        """Test the quartic reference model satisfies every hypothesis"""
        report = validate_hypotheses(quartic_params())
        assert report.passes_all()
        assert report.leading_terms == frozenset({4})
        assert report.failures() == []

    def test_odd_leading_term_fails_hyp1(self):
        """Test an odd leading term violates Hypothesis 1"""
        vectors = np.array([[1.0], [2.0], [3.0], [4.0]])
        params = ModelParams(eta=0.0, alpha=[0.0, 0.1, 0.1, 0.1],
                             coupling=CouplingFamily(order=2, vectors=vectors),
                             modes=ModeSet.uniform([1.0]))
        report = validate_hypotheses(params)
        assert not report.passed('hyp1')
        assert "odd" in report.results['hyp1'].reason

    def test_nonpositive_top_alpha_fails_hyp1(self):
        """Test alpha_{2n} must be positive when 2n > 2 is leading"""
        params = quartic_params().with_alpha([0.0, 0.2, 0.0, 0.0])
        assert not validate_hypotheses(params).passed('hyp1')

    def test_negative_alpha_two_fails_hyp1(self):
        """Test alpha_2 >= 0 is required when 2 is leading"""
        params = ModelParams(eta=0.0, alpha=[0.3, -0.1], coupling=CouplingFamily.uniform(1, [1.0]),
                             modes=ModeSet.uniform([1.0]))
        assert not validate_hypotheses(params).passed('hyp1')

    def test_phase_function_exists(self):
        """Test a common phase per mode is found"""
        phase = np.exp(1j * 0.7)
        family = CouplingFamily.uniform(3, [phase * 0.5, 0.25])
        h = phase_function(family)
        assert h is not None
        products = h[None, :] * family.vectors
        assert np.max(np.abs(products.imag)) < 1e-14

    def test_phase_function_missing_fails_hyp4(self):
        """Test different phases on one mode violate Hypothesis 4 for n > 2"""
        vectors = np.full((6, 1), 0.5, dtype=complex)
        vectors[0, 0] = 0.5j
        params = ModelParams(eta=0.0, alpha=[0.0] * 5 + [0.1],
                             coupling=CouplingFamily(order=3, vectors=vectors),
                             modes=ModeSet.uniform([1.0]))
        assert phase_function(params.coupling) is None
        report = validate_hypotheses(params)
        assert not report.passed('hyp4')
        assert not report.passed('hyp2')

    def test_report_is_json_ready(self):
        """Test the report serializes to plain data"""
        data = validate_hypotheses(quartic_params()).to_dict()
        assert data['leading_terms'] == [4]
        assert set(data['results']) == {'hyp1', 'hyp2', 'hyp3', 'hyp4', 'hyp5'}
        assert len(data['domain_norms']['omega_minus_half']) == 4
