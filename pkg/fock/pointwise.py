"""
Pointwise annihilation A_l on the truncated Fock space

(A_1 psi)(k) = a_k psi / sqrt(w_k), so sum_k w_k ||(A_1 psi)(k)||^2 = <psi, N psi>.
(A_l psi)(k_1..k_l) = a_{k_1} ... a_{k_l} psi / sqrt(w_{k_1} ... w_{k_l}), symmetric
in its arguments because the truncated annihilators commute exactly.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fock.basis import FockBasis, FockVector
from fock.operators import annihilator_matrix
from onebody.modes import ModeSet
from utils.errors import DimensionError


@dataclass(frozen=True, eq=False)
class PointwiseAnnihilation:
    """values[k_1, ..., k_l] is the coefficient vector of (A_l psi)(k_1..k_l)"""
    order: int
    values: np.ndarray
    basis: FockBasis

    def at(self, *ks: int) -> FockVector:
        if len(ks) != self.order:
            raise ValueError(f"A_{self.order} takes {self.order} mode indices (got {len(ks)})")
        return FockVector(self.values[ks], self.basis)

    def norms(self) -> np.ndarray:
        """||(A_l psi)(k)|| for every index tuple"""
        return np.linalg.norm(self.values, axis=-1)


def pointwise_annihilation(psi: FockVector, ell: int, modes: ModeSet) -> PointwiseAnnihilation:
    """Mode-resolved l-fold annihilation of psi"""
    if ell < 1:
        raise ValueError(f"annihilation order must be >= 1 (got {ell})")
    basis = psi.basis
    if modes.count != basis.mode_count:
        raise DimensionError(f"mode set has {modes.count} modes, basis has {basis.mode_count}")

    scale = 1.0 / np.sqrt(modes.weights)
    flat = np.asarray(psi.coefficients, dtype=complex)[None, :]
    for _ in range(ell):
        stacked = [
            scale[k] * (annihilator_matrix(basis, k) @ flat.T).T
            for k in range(basis.mode_count)
        ]
        # leading axis is the most recently applied annihilator
        flat = np.stack(stacked, axis=0).reshape(-1, basis.dim)
    values = flat.reshape((basis.mode_count,) * ell + (basis.dim,))
    return PointwiseAnnihilation(order=ell, values=values, basis=basis)


def number_expectation(first: PointwiseAnnihilation, modes: ModeSet) -> float:
    """sum_k w_k ||(A_1 psi)(k)||^2"""
    return dgamma_form(first, modes, np.ones(modes.count))


def dgamma_form(first: PointwiseAnnihilation, modes: ModeSet, b: Sequence[float]) -> float:
    """sum_k B_k w_k ||(A_1 psi)(k)||^2, the quadratic form of dGamma(B)"""
    if first.order != 1:
        raise ValueError("the dGamma form identity uses A_1")
    b = np.asarray(b, dtype=float)
    return float(np.sum(b * modes.weights * first.norms() ** 2))
