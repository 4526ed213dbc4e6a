"""
Test suite for the spin-boson Hamiltonian, parity decomposition and decoupled spectra
"""
import numpy as np
import pytest

from fock.basis import enumerate_basis
from model.decoupling import coupled_fiber_spectrum, decoupled_spectrum
from model.hamiltonian import (
    SpinFockBasis,
    build_bundle,
    build_fiber,
    build_full,
    decompose,
    interaction_operator,
    parity_unitary,
    sigma_x_conjugate,
)
from onebody.modes import CouplingFamily, ModelParams, ModeSet, ModeTag
from onebody.hypotheses import leading_terms
from spectra.bounds import interaction_lower_bound
from utils.errors import DimensionError, ModelError, PreconditionError


def random_instance(rng):
    """Real couplings satisfying Hypothesis 1: f_{2n-1} = f_{2n}, alpha_2 >= 0, alpha_{2n} > 0"""
    mode_count = int(rng.integers(1, 4))
    order = int(rng.integers(1, 3))
    energies = rng.uniform(0.3, 2.0, size=mode_count)
    modes = ModeSet(energies=energies, weights=rng.uniform(0.5, 1.5, size=mode_count),
                    tags=tuple([ModeTag.ESSENTIAL] * mode_count))
    vectors = rng.normal(scale=0.5, size=(2 * order, mode_count))
    vectors[-2] = vectors[-1]
    alpha = rng.normal(scale=0.3, size=2 * order)
    alpha[1] = abs(alpha[1])
    alpha[-1] = abs(alpha[-1]) + 0.05
    params = ModelParams(eta=float(rng.uniform(-1, 1)), alpha=alpha,
                         coupling=CouplingFamily(order=order, vectors=vectors), modes=modes)
    return params, int(rng.integers(2, 7))


def quartic_params(eta=0.3, amplitudes=(0.5, 0.4)):
    modes = ModeSet.from_rows([(0.8, 1.0, "discrete"), (1.0, 1.0, "essential")])
    return ModelParams(eta=eta, alpha=[0.1, 0.2, -0.1, 0.05],
                       coupling=CouplingFamily.uniform(2, amplitudes), modes=modes)


class TestHamiltonian:
    """Test operator construction"""

    def setup_method(self):
        self.params = quartic_params()
        self.basis = enumerate_basis(2, 5)
        self.spin_basis = SpinFockBasis(self.basis)

    def test_dimensions(self):
        """Test full operator lives on C^2 (x) Fock"""
        h = build_full(self.params, self.spin_basis)
        assert h.dim == 2 * self.basis.dim
        assert h.hermitian
        assert build_fiber(self.params, self.basis, -1).dim == self.basis.dim

    def test_spin_major_layout(self):
        """Test composite positions s * D + n"""
        assert self.spin_basis.position(1, 3) == 3
        assert self.spin_basis.position(-1, 3) == self.basis.dim + 3
        with pytest.raises(ValueError):
            self.spin_basis.spin_slot(0)

    def test_free_model_is_diagonal(self):
        """Test alpha = 0 leaves eta sigma_z + dGamma(omega)"""
        params = ModelParams(eta=0.4, alpha=[0.0, 0.0], coupling=CouplingFamily.uniform(1, [0.5, 0.4]),
                             modes=self.params.modes)
        h = build_full(params, self.spin_basis).toarray()
        np.testing.assert_array_equal(h, np.diag(np.diag(h)))
        assert h[0, 0] == pytest.approx(0.4)
        assert h[self.basis.dim, self.basis.dim] == pytest.approx(-0.4)

    def test_hypothesis_one_enforced(self):
        """Test an odd leading term refuses to build"""
        vectors = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6], [0.7, 0.8]])
        params = ModelParams(eta=0.1, alpha=[0.0, 0.1, 0.1, 0.1],
                             coupling=CouplingFamily(order=2, vectors=vectors), modes=self.params.modes)
        with pytest.raises(ModelError):
            build_fiber(params, self.basis)

    def test_basis_mismatch(self):
        """Test the basis must have one slot per mode"""
        with pytest.raises(DimensionError):
            build_fiber(self.params, enumerate_basis(3, 4))

    def test_fiber_sign_checked(self):
        """Test only +1 / -1 fibers exist"""
        with pytest.raises(ValueError):
            build_fiber(self.params, self.basis, 2)

    def test_sigma_x_conjugation_flips_eta(self):
        """Test (sigma_x (x) 1) H_eta (sigma_x (x) 1) = H_{-eta}"""
        h = build_full(self.params, self.spin_basis)
        flipped = sigma_x_conjugate(h, self.spin_basis).toarray()
        direct = build_full(self.params.with_eta(-self.params.eta), self.spin_basis).toarray()
        np.testing.assert_allclose(flipped, direct, atol=1e-14)

    def test_parity_unitary_is_involution(self):
        """Test U is real symmetric with U^2 = 1"""
        u = parity_unitary(self.spin_basis).toarray()
        np.testing.assert_array_equal(u, u.T)
        np.testing.assert_array_equal(u @ u, np.eye(self.spin_basis.dim))

    def test_bundle_digest(self):
        """Test the bundle records the parameter hash and cutoff"""
        bundle = build_bundle(self.params, self.basis)
        assert bundle.params_digest == self.params.digest()
        assert bundle.cutoff == 5
        assert bundle.fock_dim == self.basis.dim


class TestDecomposition:
    """Test U H U = F_{+eta} (+) F_{-eta}"""

    def setup_method(self):
        self.rng = np.random.default_rng(20240501)

    def test_randomized_decomposition(self):
        """Test off-block entries vanish and blocks match the fibers"""
        for _ in range(25):
            params, cutoff = random_instance(self.rng)
            bundle = build_bundle(params, enumerate_basis(params.modes.count, cutoff))
            offblock, (plus, minus) = decompose(bundle)
            assert offblock <= 1e-13
            np.testing.assert_allclose(plus.toarray(), bundle.f_plus.toarray(), atol=1e-13)
            np.testing.assert_allclose(minus.toarray(), bundle.f_minus.toarray(), atol=1e-13)

    def test_spectrum_union(self):
        """Test spec(H) is the union of the fiber spectra"""
        for _ in range(10):
            params, cutoff = random_instance(self.rng)
            bundle = build_bundle(params, enumerate_basis(params.modes.count, cutoff))
            full = np.linalg.eigvalsh(bundle.h_full.toarray())
            union = np.sort(np.concatenate([
                np.linalg.eigvalsh(bundle.f_plus.toarray()),
                np.linalg.eigvalsh(bundle.f_minus.toarray()),
            ]))
            np.testing.assert_allclose(full, union, atol=1e-10)

    def test_fiber_gap_bound(self):
        """Test E_{|eta|} - E_{-|eta|} <= 2|eta| at every truncation"""
        for _ in range(25):
            params, cutoff = random_instance(self.rng)
            bundle = build_bundle(params, enumerate_basis(params.modes.count, cutoff))
            upper, lower = (bundle.f_plus, bundle.f_minus) if params.eta >= 0 else (bundle.f_minus, bundle.f_plus)
            e_upper = np.linalg.eigvalsh(upper.toarray())[0]
            e_lower = np.linalg.eigvalsh(lower.toarray())[0]
            assert e_upper - e_lower <= 2 * abs(params.eta) + 1e-10

    def test_dimension_mismatch(self):
        """Test bundles mixing cutoffs are rejected"""
        params = quartic_params()
        bundle = build_bundle(params, enumerate_basis(2, 4))
        other = build_bundle(params, enumerate_basis(2, 5))
        mixed = bundle.__class__(
            h_full=bundle.h_full, f_plus=other.f_plus, f_minus=bundle.f_minus,
            u_parity=bundle.u_parity, spin_basis=bundle.spin_basis,
            params_digest=bundle.params_digest, cutoff=4,
        )
        with pytest.raises(DimensionError):
            decompose(mixed)


class TestInteractionBound:
    """Test the interaction lower bound against truncated operators"""

    def setup_method(self):
        self.rng = np.random.default_rng(77)

    def test_randomized_bound(self):
        """Test sum_{j>=2} alpha_j phi(f)^j >= C(alpha) at every truncation"""
        violations = 0
        for _ in range(50):
            order = int(self.rng.integers(1, 3))
            mode_count = int(self.rng.integers(1, 3))
            modes = ModeSet.uniform(self.rng.uniform(0.5, 1.5, size=mode_count))
            coupling = CouplingFamily.uniform(order, self.rng.normal(scale=0.6, size=mode_count))
            alpha = self.rng.normal(scale=0.5, size=2 * order)
            alpha[-1] = abs(alpha[-1]) + 0.05
            params = ModelParams(eta=0.0, alpha=alpha, coupling=coupling, modes=modes)
            bound = interaction_lower_bound(alpha, leading_terms(coupling))
            basis = enumerate_basis(mode_count, int(self.rng.integers(2, 9)))
            lowest = np.linalg.eigvalsh(interaction_operator(params, basis).toarray())[0]
            if lowest < bound - 1e-10:
                violations += 1
        assert violations == 0

    def test_several_leading_terms(self):
        """Test the bound when every even index is a leading term"""
        violations = 0
        for _ in range(50):
            order = int(self.rng.integers(2, 4))
            mode_count = int(self.rng.integers(1, 3))
            modes = ModeSet.uniform(self.rng.uniform(0.5, 1.5, size=mode_count))
            vectors = self.rng.normal(scale=0.6, size=(2 * order, mode_count))
            for i in range(3, 2 * order, 2):
                vectors[i - 1] = vectors[i]
            coupling = CouplingFamily(order=order, vectors=vectors)
            leading = leading_terms(coupling)
            assert leading == frozenset(range(2, 2 * order + 1, 2))
            alpha = self.rng.normal(scale=0.5, size=2 * order)
            alpha[1::2] = np.abs(alpha[1::2]) + 0.05
            params = ModelParams(eta=0.0, alpha=alpha, coupling=coupling, modes=modes)
            bound = interaction_lower_bound(alpha, leading)
            basis = enumerate_basis(mode_count, int(self.rng.integers(2, 9)))
            matrix = interaction_operator(params, basis).toarray()
            lowest = np.linalg.eigvalsh(matrix)[0]
            if lowest < bound - 1e-12 * (1 + np.abs(matrix).sum(axis=1).max()):
                violations += 1
        assert violations == 0


class TestDecoupling:
    """Test the decoupled spectrum against full diagonalization"""

    def setup_method(self):
        modes = ModeSet.from_rows([(0.8, 1.0, "discrete"), (1.1, 0.7, "essential"),
                                   (1.7, 1.3, "essential")])
        self.params = ModelParams(eta=0.35, alpha=[0.1, 0.2, -0.05, 0.05],
                                  coupling=CouplingFamily.uniform(2, [0.5, 0.3, 0.0]), modes=modes)

    def test_matches_full_diagonalization(self):
        """Test multiset equality with the free mode decoupled"""
        basis = enumerate_basis(3, 6)
        for sign in (1, -1):
            full = np.linalg.eigvalsh(build_fiber(self.params, basis, sign).toarray())
            decoupled = decoupled_spectrum(self.params, [0, 1], 6, sign=sign)
            assert decoupled.matched
            assert len(decoupled) == basis.dim
            np.testing.assert_allclose(decoupled.eigenvalues, full, atol=1e-10)

    def test_free_mode_must_be_uncoupled(self):
        """Test declaring a coupled mode free is a precondition error"""
        with pytest.raises(PreconditionError):
            decoupled_spectrum(self.params, [0], 4)

    def test_cap_and_ceiling(self):
        """Test a reduced cap or an energy ceiling is reported as unmatched"""
        capped = decoupled_spectrum(self.params, [0, 1], 5, free_quanta_cap=2)
        assert capped.cap == 2
        assert not capped.matched
        ceiling = decoupled_spectrum(self.params, [0, 1], 5, energy_ceiling=2.0)
        assert ceiling.pruned > 0
        assert not ceiling.matched
        assert np.all(ceiling.eigenvalues[:3] == decoupled_spectrum(self.params, [0, 1], 5).eigenvalues[:3])

    def test_vacuum_only_coupled_set(self):
        """Test an empty coupled set leaves the vacuum level sign * eta"""
        free = self.params.with_coupling_support([])
        np.testing.assert_allclose(coupled_fiber_spectrum(free, [], 4, -1), [-0.35])
        spectrum = decoupled_spectrum(free, [], 3)
        full = np.linalg.eigvalsh(build_fiber(free, enumerate_basis(3, 3), 1).toarray())
        np.testing.assert_allclose(spectrum.eigenvalues, full, atol=1e-12)
