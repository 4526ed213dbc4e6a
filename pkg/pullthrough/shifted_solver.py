"""
Conjugate gradient for (F - E + s) x = b over many shifts s of one matrix
"""
import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import CG_MAX_ITERATIONS, CG_RTOL
from fock.operators import SparseOp
from utils.errors import NumericalSingularityError, SolverError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveInfo:
    """Convergence record of one shifted solve"""
    shift: float
    iterations: int
    residual: float
    success: bool


class ShiftedSolver:
    """
    CG on the Hermitian positive-definite operator F - E + s.

    A non-positive curvature p^H A p <= 0 means positive definiteness failed
    (a truncation artifact) and raises NumericalSingularityError.
    """

    def __init__(self, op: SparseOp, energy: float, rtol: float = CG_RTOL,
                 max_iterations: int = CG_MAX_ITERATIONS):
        self.matrix = op.matrix
        self.energy = float(energy)
        self.rtol = rtol
        self.max_iterations = max_iterations
        self.history: List[SolveInfo] = []

    def _apply(self, x: np.ndarray, shift: float) -> np.ndarray:
        return self.matrix @ x + (shift - self.energy) * x

    def solve(self, b: np.ndarray, shift: float, x0: Optional[np.ndarray] = None,
              mode: Any = None) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        b_norm = float(np.linalg.norm(b))
        if b_norm == 0.0:
            self.history.append(SolveInfo(shift, 0, 0.0, True))
            return np.zeros_like(b)

        x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=complex)
        r = b - self._apply(x, shift)
        p = r.copy()
        rr = float(np.vdot(r, r).real)
        threshold = (self.rtol * b_norm) ** 2

        iterations = 0
        while rr > threshold:
            if iterations >= self.max_iterations:
                self.history.append(SolveInfo(shift, iterations, float(np.sqrt(rr)) / b_norm, False))
                raise SolverError(
                    f"shifted CG did not converge for mode {mode} in {iterations} iterations",
                    diagnostics={'mode': mode, 'shift': shift, 'residual': float(np.sqrt(rr)) / b_norm},
                )
            v = self._apply(p, shift)
            curvature = float(np.vdot(p, v).real)
            if curvature <= 0:
                raise NumericalSingularityError(
                    f"shifted system F - E + {shift:.6g} is not positive definite", mode=mode
                )
            step = rr / curvature
            x += step * p
            r -= step * v
            rr_next = float(np.vdot(r, r).real)
            p = r + (rr_next / rr) * p
            rr = rr_next
            iterations += 1

        self.history.append(SolveInfo(shift, iterations, float(np.sqrt(rr)) / b_norm, True))
        return x

    def solve_many(self, sources: Sequence[np.ndarray], shifts: Sequence[float],
                   labels: Optional[Sequence[Any]] = None) -> List[np.ndarray]:
        """Solve in order, warm-starting each system from its predecessor"""
        labels = list(range(len(shifts))) if labels is None else list(labels)
        solutions = []
        previous = None
        for b, shift, label in zip(sources, shifts, labels):
            x = self.solve(b, shift, x0=previous, mode=label)
            solutions.append(x)
            if np.any(x):
                previous = x
        logger.debug(
            f"Shifted CG: {len(solutions)} systems, "
            f"{sum(info.iterations for info in self.history[-len(solutions):])} iterations"
        )
        return solutions

    def iteration_counts(self) -> Tuple[int, ...]:
        return tuple(info.iterations for info in self.history)
