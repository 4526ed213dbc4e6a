"""
Spectrum of a fiber whose coupling vanishes on part of the modes

With coupled modes C and free modes R, the sector holding k free quanta is
F_{(-1)^k eta} on C at cutoff N_max - k, shifted by the free energies. The
graded truncation keeps every such sector invariant, so with the free-quanta
cap at N_max the assembled multiset is exactly the spectrum on all modes.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh

from config.settings import DENSE_DIMENSION_LIMIT
from fock.basis import enumerate_basis
from model.hamiltonian import build_fiber
from onebody.modes import ModelParams
from utils.errors import CapacityError, PreconditionError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DecoupledSpectrum:
    """Sorted eigenvalues assembled sector by sector"""
    eigenvalues: np.ndarray
    n_max: int
    cap: int
    coupled_modes: List[int]
    matched: bool
    pruned: int = 0

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def contains(self, value: float, atol: float) -> bool:
        return bool(self.eigenvalues.size) and float(np.min(np.abs(self.eigenvalues - value))) <= atol


def coupled_fiber_spectrum(params: ModelParams, coupled: List[int], cutoff: int, sign: int) -> np.ndarray:
    """Dense spectrum of F_{sign*eta} built on the coupled modes only"""
    if not coupled:
        # vacuum only: Gamma(-1) = 1
        return np.array([sign * params.eta])
    restricted = params.restricted(coupled)
    basis = enumerate_basis(len(coupled), cutoff)
    if basis.dim > DENSE_DIMENSION_LIMIT:
        raise CapacityError(
            f"coupled fiber of dimension {basis.dim} exceeds the dense limit {DENSE_DIMENSION_LIMIT}"
        )
    return eigvalsh(build_fiber(restricted, basis, sign).toarray())


def decoupled_spectrum(params: ModelParams, coupled_modes: Sequence[int], n_max: int,
                       free_quanta_cap: Optional[int] = None, sign: int = 1,
                       energy_ceiling: Optional[float] = None) -> DecoupledSpectrum:
    """
    Spectrum of F_{sign*eta} on all modes, built from coupled-only fibers.

    Free-mode occupations whose energy already places every level of their
    sector above energy_ceiling are skipped and counted in `pruned`.
    """
    coupled = sorted(set(int(k) for k in coupled_modes))
    free = [k for k in range(params.modes.count) if k not in coupled]
    if any(not 0 <= k < params.modes.count for k in coupled):
        raise PreconditionError(f"coupled modes {coupled} outside 0..{params.modes.count - 1}")

    leaking = [k for k in free if np.any(params.coupling.vectors[:, k] != 0)]
    if leaking:
        raise PreconditionError(f"coupling is nonzero on modes {leaking} declared free")

    cap = n_max if free_quanta_cap is None else min(int(free_quanta_cap), n_max)
    if cap < 0:
        raise ValueError(f"free quanta cap must be >= 0 (got {free_quanta_cap})")
    if not free:
        cap = 0

    if free:
        free_states = enumerate_basis(len(free), cap).states
        free_energies = free_states @ params.modes.energies[free]
        free_grades = free_states.sum(axis=1)
    else:
        free_energies = np.zeros(1)
        free_grades = np.zeros(1, dtype=np.int64)

    pieces = []
    pruned = 0
    for k in range(cap + 1):
        in_sector = free_energies[free_grades == k]
        if in_sector.size == 0:
            continue
        fiber = coupled_fiber_spectrum(params, coupled, n_max - k, sign * (-1) ** k)
        if energy_ceiling is not None:
            keep = in_sector + fiber[0] <= energy_ceiling
            pruned += int(np.count_nonzero(~keep))
            in_sector = in_sector[keep]
        pieces.extend(fiber + shift for shift in in_sector)

    eigenvalues = np.sort(np.concatenate(pieces)) if pieces else np.empty(0)
    matched = (cap == n_max or not free) and pruned == 0
    logger.debug(
        f"Decoupled spectrum: coupled={coupled} free={free} cap={cap} "
        f"levels={eigenvalues.size} pruned={pruned}"
    )
    return DecoupledSpectrum(
        eigenvalues=eigenvalues,
        n_max=n_max,
        cap=cap,
        coupled_modes=coupled,
        matched=matched,
        pruned=pruned,
    )
