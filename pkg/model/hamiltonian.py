"""
Spin-boson Hamiltonian, fiber operators and the spin-parity unitary

Composite index on spin x Fock is spin-major: s * D + n, with s = 0 the
sigma_z = +1 state e_1 and s = 1 the sigma_z = -1 state e_{-1}.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sps

from config.settings import BLOCK_MATCH_ATOL, DECOMPOSITION_ATOL
from fock.basis import FockBasis
from fock.operators import SparseOp, dgamma, field_power, gamma_parity
from onebody.hypotheses import validate_hypotheses
from onebody.modes import ModelParams
from utils.errors import DecompositionError, DimensionError, ModelError


logger = logging.getLogger(__name__)

SPIN_VALUES = (1, -1)

_SIGMA_X = sps.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_SIGMA_Z = sps.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
_SPIN_ONE = sps.identity(2, format='csr')


@dataclass(frozen=True, eq=False)
class SpinFockBasis:
    """C^2 (x) Fock with ordering (e_1, e_{-1})"""
    fock: FockBasis

    @property
    def dim(self) -> int:
        return 2 * self.fock.dim

    def spin_slot(self, spin: int) -> int:
        if spin not in SPIN_VALUES:
            raise ValueError(f"spin label must be +1 or -1 (got {spin})")
        return SPIN_VALUES.index(spin)

    def position(self, spin: int, fock_position: int) -> int:
        return self.spin_slot(spin) * self.fock.dim + fock_position

    def block(self, spin: int) -> slice:
        start = self.spin_slot(spin) * self.fock.dim
        return slice(start, start + self.fock.dim)


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """H on spin x Fock, the two fibers on Fock and the parity unitary"""
    h_full: SparseOp
    f_plus: SparseOp
    f_minus: SparseOp
    u_parity: SparseOp
    spin_basis: SpinFockBasis
    params_digest: str
    cutoff: int

    @property
    def fock_dim(self) -> int:
        return self.spin_basis.fock.dim


def _require_buildable(params: ModelParams, basis: FockBasis):
    if basis.mode_count != params.modes.count:
        raise DimensionError(
            f"basis has {basis.mode_count} modes but the model has {params.modes.count}"
        )
    report = validate_hypotheses(params)
    if not report.passed('hyp1'):
        raise ModelError(f"Hypothesis 1 violated: {report.results['hyp1'].reason}")


def _interaction_terms(params: ModelParams, basis: FockBasis, start: int = 1) -> Dict[int, sps.csr_matrix]:
    """alpha_i phi(f_i)^i for every i >= start with alpha_i != 0"""
    terms = {}
    for i in range(start, 2 * params.order + 1):
        alpha_i = params.a(i)
        if alpha_i == 0:
            continue
        terms[i] = alpha_i * field_power(basis, params.coupling.f(i), params.modes, i).matrix
    return terms


def _fiber_matrix(params: ModelParams, basis: FockBasis, sign: int,
                  terms: Dict[int, sps.csr_matrix]) -> sps.csr_matrix:
    matrix = sign * params.eta * gamma_parity(basis).matrix + dgamma(basis, params.modes.energies).matrix
    for i in sorted(terms):
        matrix = matrix + terms[i]
    return matrix


def _full_matrix(params: ModelParams, basis: FockBasis,
                 terms: Dict[int, sps.csr_matrix]) -> sps.csr_matrix:
    one = sps.identity(basis.dim, format='csr')
    matrix = (params.eta * sps.kron(_SIGMA_Z, one)
              + sps.kron(_SPIN_ONE, dgamma(basis, params.modes.energies).matrix))
    # (sigma_x (x) phi)^i = sigma_x^(i mod 2) (x) phi^i
    for i in sorted(terms):
        spin_factor = _SIGMA_X if i % 2 else _SPIN_ONE
        matrix = matrix + sps.kron(spin_factor, terms[i])
    return matrix


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"fiber sign must be +1 or -1 (got {sign})")
    return int(sign)


def build_fiber(params: ModelParams, basis: FockBasis, sign: int = 1) -> SparseOp:
    """F_{sign*eta} = sign*eta Gamma(-1) + dGamma(omega) + sum_i alpha_i phi(f_i)^i"""
    sign = _check_sign(sign)
    _require_buildable(params, basis)
    matrix = _fiber_matrix(params, basis, sign, _interaction_terms(params, basis))
    logger.debug(f"Built fiber sign={sign:+d} dim={basis.dim} nnz={matrix.nnz}")
    return SparseOp(matrix, hermitian=True, label=f"F_{'+' if sign > 0 else '-'}eta")


def build_full(params: ModelParams, spin_basis: SpinFockBasis) -> SparseOp:
    """H_eta = eta sigma_z (x) 1 + 1 (x) dGamma(omega) + sum_i alpha_i (sigma_x (x) phi(f_i))^i"""
    basis = spin_basis.fock
    _require_buildable(params, basis)
    matrix = _full_matrix(params, basis, _interaction_terms(params, basis))
    logger.debug(f"Built full Hamiltonian dim={spin_basis.dim} nnz={matrix.nnz}")
    return SparseOp(matrix, hermitian=True, label="H_eta")


def parity_unitary(spin_basis: SpinFockBasis) -> SparseOp:
    """Identity on even grades, spin flip on odd grades; real, symmetric, U^2 = 1"""
    odd = (spin_basis.fock.grades % 2).astype(float)
    even = 1.0 - odd
    matrix = sps.kron(_SPIN_ONE, sps.diags(even)) + sps.kron(_SIGMA_X, sps.diags(odd))
    return SparseOp(matrix, hermitian=True, label="U")


def interaction_operator(params: ModelParams, basis: FockBasis, start: int = 2) -> SparseOp:
    """sum_{j >= start} alpha_j phi(f_j)^j on Fock"""
    if basis.mode_count != params.modes.count:
        raise DimensionError(
            f"basis has {basis.mode_count} modes but the model has {params.modes.count}"
        )
    matrix = sps.csr_matrix((basis.dim, basis.dim), dtype=float)
    terms = _interaction_terms(params, basis, start=start)
    for i in sorted(terms):
        matrix = matrix + terms[i]
    return SparseOp(matrix, hermitian=True, label=f"V_{start}")


def sigma_x_conjugate(h: SparseOp, spin_basis: SpinFockBasis) -> SparseOp:
    """(sigma_x (x) 1) H (sigma_x (x) 1)"""
    if h.dim != spin_basis.dim:
        raise DimensionError(f"operator of dimension {h.dim} on spin basis of dimension {spin_basis.dim}")
    flip = sps.kron(_SIGMA_X, sps.identity(spin_basis.fock.dim, format='csr'), format='csr')
    return SparseOp(flip @ h.matrix @ flip, hermitian=h.hermitian, label=f"sx {h.label} sx")


def build_bundle(params: ModelParams, basis: FockBasis) -> OperatorBundle:
    """H, F_+, F_- and U at one cutoff, sharing the field powers"""
    _require_buildable(params, basis)
    spin_basis = SpinFockBasis(basis)
    terms = _interaction_terms(params, basis)

    bundle = OperatorBundle(
        h_full=SparseOp(_full_matrix(params, basis, terms), hermitian=True, label="H_eta"),
        f_plus=SparseOp(_fiber_matrix(params, basis, 1, terms), hermitian=True, label="F_+eta"),
        f_minus=SparseOp(_fiber_matrix(params, basis, -1, terms), hermitian=True, label="F_-eta"),
        u_parity=parity_unitary(spin_basis),
        spin_basis=spin_basis,
        params_digest=params.digest(),
        cutoff=basis.cutoff,
    )
    logger.debug(
        f"Bundle {bundle.params_digest[:12]} N_max={basis.cutoff} "
        f"fock_dim={basis.dim} nnz(H)={bundle.h_full.nnz}"
    )
    return bundle


def _max_abs(matrix: sps.spmatrix) -> float:
    return float(abs(matrix).max()) if matrix.nnz else 0.0


def decompose(bundle: OperatorBundle) -> Tuple[float, Tuple[SparseOp, SparseOp]]:
    """
    U H U restricted to the spin-diagonal blocks.

    Returns the largest off-block magnitude and the (e_1, e_{-1}) blocks, which
    must reproduce F_{+eta} and F_{-eta}.
    """
    dim = bundle.fock_dim
    if bundle.h_full.dim != 2 * dim or bundle.f_plus.dim != dim or bundle.f_minus.dim != dim:
        raise DimensionError("bundle operators were built at different cutoffs")

    u = bundle.u_parity.matrix
    conjugated = (u @ bundle.h_full.matrix @ u).tocsr()
    upper, lower = bundle.spin_basis.block(1), bundle.spin_basis.block(-1)

    offblock = max(_max_abs(conjugated[upper, lower]), _max_abs(conjugated[lower, upper]))
    if offblock > DECOMPOSITION_ATOL:
        raise DecompositionError(f"off-block norm {offblock:.3e} exceeds {DECOMPOSITION_ATOL:.0e}")

    plus = SparseOp(conjugated[upper, upper], hermitian=True, label="block e_1")
    minus = SparseOp(conjugated[lower, lower], hermitian=True, label="block e_-1")
    for block, fiber in ((plus, bundle.f_plus), (minus, bundle.f_minus)):
        mismatch = _max_abs(block.matrix - fiber.matrix)
        if mismatch > BLOCK_MATCH_ATOL * (1.0 + fiber.max_abs()):
            raise DecompositionError(f"{block.label} differs from {fiber.label} by {mismatch:.3e}")

    logger.debug(f"Decomposition off-block norm {offblock:.3e}")
    return offblock, (plus, minus)
