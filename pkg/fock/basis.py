"""
Truncated bosonic Fock space: occupation-number basis and Fock vectors

States are occupation multi-indices n with |n| = sum_k n_k <= N_max, ordered
by grade |n| and lexicographically inside a grade. Position 0 is the vacuum.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from config.settings import MAX_BASIS_DIMENSION
from utils.errors import CapacityError, DimensionError


logger = logging.getLogger(__name__)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Occupations of `parts` modes summing to `total`, lexicographic ascending"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Graded occupation basis with a multi-index -> position map"""
    mode_count: int
    cutoff: int
    states: np.ndarray

    def __post_init__(self):
        self.states.setflags(write=False)

    @cached_property
    def index(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(int(x) for x in state): pos for pos, state in enumerate(self.states)}

    @cached_property
    def grades(self) -> np.ndarray:
        grades = self.states.sum(axis=1)
        grades.setflags(write=False)
        return grades

    @property
    def dim(self) -> int:
        return int(self.states.shape[0])

    def position(self, occupation: Sequence[int]) -> int:
        key = tuple(int(x) for x in occupation)
        if key not in self.index:
            raise KeyError(f"occupation {key} is not in the basis (M={self.mode_count}, N_max={self.cutoff})")
        return self.index[key]

    def guard_mask(self, degree: int) -> np.ndarray:
        """States far enough below the cutoff: |n| <= N_max - degree"""
        return self.grades <= self.cutoff - degree

    def same_shape(self, other: "FockBasis") -> bool:
        return self.mode_count == other.mode_count and self.cutoff == other.cutoff


def basis_dimension(mode_count: int, cutoff: int) -> int:
    return comb(mode_count + cutoff, mode_count)


def enumerate_basis(mode_count: int, cutoff: int,
                    max_dimension: int = MAX_BASIS_DIMENSION) -> FockBasis:
    """All occupations with |n| <= cutoff; dimension binomial(M + N_max, M)"""
    if mode_count < 1:
        raise ValueError(f"mode count must be >= 1 (got {mode_count})")
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0 (got {cutoff})")

    dim = basis_dimension(mode_count, cutoff)
    if dim > max_dimension:
        raise CapacityError(
            f"basis dimension {dim} for M={mode_count}, N_max={cutoff} exceeds the limit {max_dimension}"
        )

    states = np.empty((dim, mode_count), dtype=np.int64)
    pos = 0
    for grade in range(cutoff + 1):
        for occupation in _compositions(grade, mode_count):
            states[pos] = occupation
            pos += 1

    logger.debug(f"Enumerated Fock basis M={mode_count} N_max={cutoff} dim={dim}")
    return FockBasis(mode_count=mode_count, cutoff=cutoff, states=states)


@dataclass(frozen=True, eq=False)
class FockVector:
    """Complex coefficients over a FockBasis"""
    coefficients: np.ndarray
    basis: FockBasis

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients)
        if coefficients.shape != (self.basis.dim,):
            raise DimensionError(
                f"vector of shape {coefficients.shape} does not match basis dimension {self.basis.dim}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("Fock vector coefficients must be finite")
        object.__setattr__(self, 'coefficients', coefficients)

    @classmethod
    def vacuum(cls, basis: FockBasis) -> "FockVector":
        coefficients = np.zeros(basis.dim, dtype=complex)
        coefficients[0] = 1.0
        return cls(coefficients, basis)

    @classmethod
    def basis_state(cls, basis: FockBasis, occupation: Sequence[int]) -> "FockVector":
        coefficients = np.zeros(basis.dim, dtype=complex)
        coefficients[basis.position(occupation)] = 1.0
        return cls(coefficients, basis)

    def inner(self, other: "FockVector") -> complex:
        """<self, other>, conjugate-linear in self"""
        if other.basis.dim != self.basis.dim:
            raise DimensionError("inner product of vectors over different bases")
        return complex(np.vdot(self.coefficients, other.coefficients))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def normalized(self) -> "FockVector":
        return FockVector(self.coefficients / self.norm(), self.basis)

    def grade_weights(self) -> np.ndarray:
        """Squared norm carried by each grade |n| = 0..N_max"""
        return np.bincount(self.basis.grades, weights=np.abs(self.coefficients) ** 2,
                           minlength=self.basis.cutoff + 1)
