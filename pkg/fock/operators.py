"""
Second-quantized sparse operators on a truncated Fock space

Measure weights enter amplitudes as sqrt(w_k), so every Fock-level inner
product is a plain sum:  a(g) = sum_k conj(g_k sqrt(w_k)) a_k.
All operators are compressions to the graded basis; powers are powers of the
compressed matrices.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import expm
from scipy.special import factorial

from config.settings import HERMITIAN_RTOL
from fock.basis import FockBasis, FockVector
from onebody.modes import ModeSet, infrared_norm
from utils.errors import DimensionError


logger = logging.getLogger(__name__)


def _canonical(matrix) -> sps.csr_matrix:
    """Sorted CSR with duplicate entries summed"""
    csr = sps.csr_matrix(matrix)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def _real_if_possible(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if np.iscomplexobj(values) and np.all(values.imag == 0):
        return values.real.copy()
    return values


def hermiticity_defect(matrix: sps.spmatrix) -> float:
    """max |A - A^H| relative to max |A| (0 for the zero matrix)"""
    scale = abs(matrix).max() if matrix.nnz else 0.0
    if scale == 0:
        return 0.0
    diff = matrix - matrix.conj().T
    return float(abs(diff).max() / scale) if diff.nnz else 0.0


@dataclass(frozen=True, eq=False)
class SparseOp:
    """Canonical CSR operator over a declared basis dimension"""
    matrix: sps.csr_matrix
    hermitian: bool = False
    label: str = ""

    def __post_init__(self):
        matrix = _canonical(self.matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"operator must be square (got {matrix.shape})")
        object.__setattr__(self, 'matrix', matrix)
        if self.hermitian:
            defect = hermiticity_defect(matrix)
            if defect > HERMITIAN_RTOL:
                raise ValueError(f"operator '{self.label}' flagged Hermitian but defect is {defect:.3e}")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "SparseOp":
        return SparseOp(self.matrix.conj().T, hermitian=self.hermitian, label=f"({self.label})^H")

    def max_abs(self) -> float:
        return float(abs(self.matrix).max()) if self.nnz else 0.0

    def apply(self, vector: Union[FockVector, np.ndarray]) -> Union[FockVector, np.ndarray]:
        if isinstance(vector, FockVector):
            if vector.basis.dim != self.dim:
                raise DimensionError(f"operator of dimension {self.dim} applied to a vector of {vector.basis.dim}")
            return FockVector(self.matrix @ vector.coefficients, vector.basis)
        return self.matrix @ vector

    def _check(self, other: "SparseOp"):
        if other.dim != self.dim:
            raise DimensionError(f"operator dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        return SparseOp(self.matrix + other.matrix, hermitian=self.hermitian and other.hermitian,
                        label=f"{self.label}+{other.label}")

    def __sub__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        return SparseOp(self.matrix - other.matrix, hermitian=self.hermitian and other.hermitian,
                        label=f"{self.label}-{other.label}")

    def __mul__(self, scalar: Number) -> "SparseOp":
        real = np.isreal(scalar)
        return SparseOp(self.matrix * scalar, hermitian=self.hermitian and bool(real),
                        label=f"{scalar}*{self.label}")

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, SparseOp):
            self._check(other)
            return SparseOp(self.matrix @ other.matrix, label=f"{self.label}@{other.label}")
        return self.apply(other)


def identity(dim: int, label: str = "1") -> SparseOp:
    return SparseOp(sps.identity(dim, format='csr'), hermitian=True, label=label)


def diagonal(values: np.ndarray, label: str = "") -> SparseOp:
    values = _real_if_possible(values)
    return SparseOp(sps.diags(values, format='csr'), hermitian=not np.iscomplexobj(values), label=label)


def commutator(a: SparseOp, b: SparseOp) -> SparseOp:
    """[A, B] = AB - BA"""
    a._check(b)
    return SparseOp(a.matrix @ b.matrix - b.matrix @ a.matrix, label=f"[{a.label},{b.label}]")


def _amplitudes(basis: FockBasis, g: Sequence[complex], modes: ModeSet) -> np.ndarray:
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.size != modes.count or modes.count != basis.mode_count:
        raise DimensionError(
            f"amplitudes ({g.size}), modes ({modes.count}) and basis ({basis.mode_count}) must agree"
        )
    return g * np.sqrt(modes.weights)


@lru_cache(maxsize=256)
def annihilator_matrix(basis: FockBasis, k: int) -> sps.csr_matrix:
    states = basis.states
    cols = np.flatnonzero(states[:, k] > 0)
    lowered = states[cols].copy()
    lowered[:, k] -= 1
    index = basis.index
    rows = np.fromiter((index[tuple(int(x) for x in occ)] for occ in lowered), dtype=np.int64, count=cols.size)
    data = np.sqrt(states[cols, k].astype(float))
    return _canonical(sps.coo_matrix((data, (rows, cols)), shape=(basis.dim, basis.dim)))


def mode_annihilator(basis: FockBasis, k: int) -> SparseOp:
    """a_k with <n - delta_k| a_k |n> = sqrt(n_k)"""
    if not 0 <= k < basis.mode_count:
        raise IndexError(f"mode index {k} outside 0..{basis.mode_count - 1}")
    return SparseOp(annihilator_matrix(basis, k), label=f"a_{k}")


def annihilation(basis: FockBasis, g: Sequence[complex], modes: ModeSet) -> SparseOp:
    """a(g) = sum_k conj(g_k sqrt(w_k)) a_k"""
    coeffs = _real_if_possible(np.conj(_amplitudes(basis, g, modes)))
    matrix = sps.csr_matrix((basis.dim, basis.dim), dtype=coeffs.dtype)
    for k, c in enumerate(coeffs):
        if c != 0:
            matrix = matrix + c * annihilator_matrix(basis, k)
    return SparseOp(matrix, label="a(g)")


def creation(basis: FockBasis, g: Sequence[complex], modes: ModeSet) -> SparseOp:
    """a^dagger(g), the conjugate transpose of a(g)"""
    a = annihilation(basis, g, modes)
    return SparseOp(a.matrix.conj().T, label="a^dagger(g)")


def field(basis: FockBasis, g: Sequence[complex], modes: ModeSet) -> SparseOp:
    """phi(g) = a(g) + a^dagger(g)"""
    a = annihilation(basis, g, modes).matrix
    return SparseOp(a + a.conj().T, hermitian=True, label="phi(g)")


def field_power(basis: FockBasis, g: Sequence[complex], modes: ModeSet, exponent: int) -> SparseOp:
    """i-th matrix power of the truncated field operator"""
    if exponent < 1:
        raise ValueError(f"field power exponent must be >= 1 (got {exponent})")
    phi = field(basis, g, modes).matrix
    power = phi
    for _ in range(exponent - 1):
        power = power @ phi
    logger.debug(f"phi^{exponent}: dim={basis.dim} nnz={power.nnz}")
    return SparseOp(power, hermitian=True, label=f"phi(g)^{exponent}")


def dgamma(basis: FockBasis, b: Sequence[float]) -> SparseOp:
    """Second quantization of a diagonal one-body operator: entry sum_k n_k b_k"""
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != basis.mode_count:
        raise DimensionError(f"dGamma needs {basis.mode_count} mode values (got {b.size})")
    return diagonal(basis.states @ b, label="dGamma(b)")


def number_operator(basis: FockBasis) -> SparseOp:
    """N = dGamma(1)"""
    return diagonal(basis.grades.astype(float), label="N")


def gamma_parity(basis: FockBasis) -> SparseOp:
    """Gamma(-1): entry (-1)^{|n|}"""
    return diagonal(np.where(basis.grades % 2 == 0, 1.0, -1.0), label="Gamma(-1)")


def exponential_vector(basis: FockBasis, g: Sequence[complex], modes: ModeSet) -> FockVector:
    """Unnormalized exponential vector: prod_k c_k^{n_k} / sqrt(n_k!), c_k = g_k sqrt(w_k)"""
    c = _amplitudes(basis, g, modes)
    states = basis.states
    powers = np.where(states == 0, 1.0 + 0j, c[None, :] ** states)
    coefficients = np.prod(powers / np.sqrt(factorial(states)), axis=1)
    return FockVector(coefficients, basis)


def coherent_state(basis: FockBasis, h: Sequence[complex], modes: ModeSet) -> FockVector:
    """e^{-||h||^2/2} eps(h), normalized in the untruncated space"""
    norm_sq = float(np.sum(np.abs(_amplitudes(basis, h, modes)) ** 2))
    eps = exponential_vector(basis, h, modes)
    return FockVector(np.exp(-norm_sq / 2) * eps.coefficients, basis)


def weyl(basis: FockBasis, h: Sequence[complex], modes: ModeSet) -> SparseOp:
    """W(h) = exp(a^dagger(h) - a(h)) on the truncated space"""
    a = annihilation(basis, h, modes).matrix
    generator = (a.conj().T - a).tocsc()
    return SparseOp(expm(generator), label="W(h)")


def field_lower_bound(g: Sequence[complex], modes: ModeSet) -> float:
    """-||omega^{-1/2} g||^2: dGamma(omega) + phi(g) is bounded below by this"""
    return -infrared_norm(g, modes, 0.5) ** 2
