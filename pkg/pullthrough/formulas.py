"""
Pull-through identities for the ground state of F_{-|eta|}

With psi the ground state and E its energy, [a_k, phi(f)] = f(k) sqrt(w_k) and
a_k Gamma(-1) = -Gamma(-1) a_k give

    (A_1 psi)(k) = -(F_{+|eta|} - E + w(k))^{-1} sum_j j alpha_j f_j(k) phi(f_j)^{j-1} psi

and one more annihilation, back in F_{-|eta|},

    (A_2 psi)(k,q) = -(F_{-|eta|} - E + w(k) + w(q))^{-1} sum_j alpha_j [
        j f_j(q) phi_j^{j-1} (A_1 psi)(k) + j f_j(k) phi_j^{j-1} (A_1 psi)(q)
        + j (j-1) f_j(k) f_j(q) phi_j^{j-2} psi ]

where w(k) is the mode energy. Both hold exactly in the untruncated space; at
a finite cutoff the residual comes from the top grades and must shrink as
N_max grows.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import CG_RTOL, DEFAULT_SEED, EIGEN_TOL, MOMENT_PLATEAU_RTOL, PULLTHROUGH_NOISE_FLOOR
from fock.basis import FockBasis, FockVector, enumerate_basis
from fock.operators import SparseOp, field as field_operator
from fock.pointwise import pointwise_annihilation
from model.hamiltonian import build_fiber
from onebody.modes import ModelParams
from pullthrough.shifted_solver import ShiftedSolver
from spectra.analysis import Cutoffs
from spectra.eigensolver import eigensolve
from utils.errors import ReasonCode


logger = logging.getLogger(__name__)


def _weighted_norm(weights: np.ndarray, values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * values ** 2)))


def _relative(residual: float, lhs: float, rhs: float) -> float:
    scale = max(lhs, rhs)
    if scale == 0.0:
        return 0.0
    return residual / scale


@dataclass(frozen=True)
class GroundState:
    """Ground state of F_{-|eta|} together with both fibers"""
    basis: FockBasis
    psi: FockVector
    energy: float
    lower: SparseOp
    upper: SparseOp


def ground_state_of_lower_fiber(params: ModelParams, cutoffs: Cutoffs) -> GroundState:
    basis = enumerate_basis(params.modes.count, cutoffs.n_max)
    lower_sign, upper_sign = (-1, 1) if params.eta >= 0 else (1, -1)
    lower = build_fiber(params, basis, lower_sign)
    upper = build_fiber(params, basis, upper_sign)
    result = eigensolve(lower, count=1, tol=cutoffs.tol, method=cutoffs.method, seed=cutoffs.seed)
    return GroundState(basis, result.fock_vector(basis), result.ground_energy, lower, upper)


class FieldPowers:
    """phi(f_j)^p v by repeated sparse products; only terms with alpha_j != 0"""

    def __init__(self, params: ModelParams, basis: FockBasis):
        self.fields = {
            j: field_operator(basis, params.coupling.f(j), params.modes).matrix
            for j in range(1, 2 * params.order + 1)
            if params.a(j) != 0
        }

    def apply(self, j: int, power: int, v: np.ndarray) -> np.ndarray:
        for _ in range(power):
            v = self.fields[j] @ v
        return v


def moments(psi: FockVector, a_values: Sequence[int] = (1, 2)) -> Dict[int, float]:
    """<psi, N^a psi> / <psi, psi>"""
    weights = np.abs(psi.coefficients) ** 2
    total = float(np.sum(weights))
    grades = psi.basis.grades.astype(float)
    return {int(a): float(np.sum(weights * grades ** a) / total) for a in a_values}


@dataclass(frozen=True, eq=False)
class PullThroughReport:
    """First-order residuals per mode and their weighted aggregate"""
    n_max: int
    energy: float
    residuals: np.ndarray
    lhs_norms: np.ndarray
    rhs_norms: np.ndarray
    aggregate: float
    relative: float
    moments: Dict[int, float]
    iterations: Tuple[int, ...] = ()
    rhs: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> Dict:
        return {
            'n_max': self.n_max,
            'energy': self.energy,
            'residuals': [float(r) for r in self.residuals],
            'rhs_norms': [float(r) for r in self.rhs_norms],
            'aggregate': self.aggregate,
            'relative': self.relative,
            'moments': {str(a): v for a, v in self.moments.items()},
            'cg_iterations': list(self.iterations),
        }


def pull_through_residual(params: ModelParams, cutoffs: Cutoffs,
                          ground: Optional[GroundState] = None) -> PullThroughReport:
    """Compare A_1 psi against the resolvent formula, mode by mode"""
    ground = ground or ground_state_of_lower_fiber(params, cutoffs)
    modes = params.modes
    psi = ground.psi.coefficients.astype(complex)

    lhs = pointwise_annihilation(ground.psi, 1, modes).values
    powers = FieldPowers(params, ground.basis)
    sources = {j: j * params.a(j) * powers.apply(j, j - 1, psi) for j in powers.fields}

    rhs_sources = []
    for k in range(modes.count):
        b = np.zeros(ground.basis.dim, dtype=complex)
        for j, g in sources.items():
            b += params.coupling.f(j)[k] * g
        rhs_sources.append(-b)

    solver = ShiftedSolver(ground.upper, ground.energy, rtol=CG_RTOL)
    rhs = np.array(solver.solve_many(rhs_sources, modes.energies, labels=range(modes.count)))

    residuals = np.linalg.norm(lhs - rhs, axis=1)
    lhs_norms = np.linalg.norm(lhs, axis=1)
    rhs_norms = np.linalg.norm(rhs, axis=1)
    aggregate = _weighted_norm(modes.weights, residuals)

    report = PullThroughReport(
        n_max=ground.basis.cutoff,
        energy=ground.energy,
        residuals=residuals,
        lhs_norms=lhs_norms,
        rhs_norms=rhs_norms,
        aggregate=aggregate,
        relative=_relative(aggregate, _weighted_norm(modes.weights, lhs_norms),
                           _weighted_norm(modes.weights, rhs_norms)),
        moments=moments(ground.psi),
        iterations=solver.iteration_counts(),
        rhs=rhs,
    )
    logger.debug(f"Pull-through N_max={report.n_max}: relative residual {report.relative:.3e}")
    return report


@dataclass(frozen=True, eq=False)
class SecondOrderReport:
    """Second-order residuals; the formula side is stored for k <= q only"""
    n_max: int
    energy: float
    upper: Dict[Tuple[int, int], np.ndarray] = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    aggregate: float = 0.0
    relative: float = 0.0

    def at(self, k: int, q: int) -> np.ndarray:
        """Formula side of (A_2 psi)(k, q), symmetric by storage"""
        return self.upper[(min(k, q), max(k, q))]

    def to_dict(self) -> Dict:
        return {
            'n_max': self.n_max,
            'energy': self.energy,
            'aggregate': self.aggregate,
            'relative': self.relative,
            'residuals': [[float(r) for r in row] for row in self.residuals],
        }


def pull_through_second_order(params: ModelParams, cutoffs: Cutoffs,
                              ground: Optional[GroundState] = None) -> SecondOrderReport:
    """Compare A_2 psi against the two-shift resolvent formula built from A_1 psi"""
    ground = ground or ground_state_of_lower_fiber(params, cutoffs)
    modes = params.modes
    count = modes.count
    psi = ground.psi.coefficients.astype(complex)

    first = pointwise_annihilation(ground.psi, 1, modes).values
    lhs = pointwise_annihilation(ground.psi, 2, modes).values
    powers = FieldPowers(params, ground.basis)

    lifted = {j: [powers.apply(j, j - 1, first[k]) for k in range(count)] for j in powers.fields}
    direct = {j: powers.apply(j, j - 2, psi) for j in powers.fields if j >= 2}

    pairs = [(k, q) for k in range(count) for q in range(k, count)]
    sources, shifts = [], []
    for k, q in pairs:
        b = np.zeros(ground.basis.dim, dtype=complex)
        for j in powers.fields:
            f = params.coupling.f(j)
            term = j * (f[q] * lifted[j][k] + f[k] * lifted[j][q])
            if j >= 2:
                term = term + j * (j - 1) * f[k] * f[q] * direct[j]
            b += params.a(j) * term
        sources.append(-b)
        shifts.append(modes.energies[k] + modes.energies[q])

    solver = ShiftedSolver(ground.lower, ground.energy, rtol=CG_RTOL)
    upper = dict(zip(pairs, solver.solve_many(sources, shifts, labels=pairs)))

    residuals = np.zeros((count, count))
    lhs_norms = np.zeros((count, count))
    rhs_norms = np.zeros((count, count))
    for (k, q), value in upper.items():
        for row, col in {(k, q), (q, k)}:
            residuals[row, col] = np.linalg.norm(lhs[row, col] - value)
            lhs_norms[row, col] = np.linalg.norm(lhs[row, col])
            rhs_norms[row, col] = np.linalg.norm(value)

    pair_weights = np.outer(modes.weights, modes.weights)
    aggregate = _weighted_norm(pair_weights, residuals)
    return SecondOrderReport(
        n_max=ground.basis.cutoff,
        energy=ground.energy,
        upper=upper,
        lhs=lhs,
        residuals=residuals,
        aggregate=aggregate,
        relative=_relative(aggregate, _weighted_norm(pair_weights, lhs_norms),
                           _weighted_norm(pair_weights, rhs_norms)),
    )


@dataclass(frozen=True, eq=False)
class PullThroughStudy:
    """First-order reports along increasing cutoffs"""
    reports: List[PullThroughReport]
    decreasing: bool

    def relative_residuals(self) -> List[float]:
        return [r.relative for r in self.reports]

    def to_dict(self) -> Dict:
        return {'reports': [r.to_dict() for r in self.reports], 'decreasing': self.decreasing}


def residuals_decreasing(values: Sequence[float], floor: float = PULLTHROUGH_NOISE_FLOOR) -> bool:
    """Non-increasing along the schedule; steps that end below the floor always pass"""
    return all(b <= a * (1 + 1e-9) or b <= floor for a, b in zip(values, values[1:]))


def pull_through_study(params: ModelParams, n_max_values: Sequence[int], tol: float = EIGEN_TOL,
                       method: str = "auto", seed: int = DEFAULT_SEED) -> PullThroughStudy:
    reports = [
        pull_through_residual(params, Cutoffs(n_max=n, tol=tol, method=method, seed=seed))
        for n in n_max_values
    ]
    values = [r.relative for r in reports]
    decreasing = residuals_decreasing(values)
    if not decreasing:
        logger.warning(f"Pull-through residuals not decreasing: {values}")
    return PullThroughStudy(reports=reports, decreasing=decreasing)


@dataclass(frozen=True, eq=False)
class MomentTable:
    """<psi, N^a psi> along a cutoff schedule"""
    n_max_values: List[int]
    values: Dict[int, List[float]]
    growth: Dict[int, bool]

    @property
    def reason(self) -> Optional[ReasonCode]:
        return ReasonCode.MOMENT_GROWTH if any(self.growth.values()) else None

    def to_dict(self) -> Dict:
        return {
            'n_max': self.n_max_values,
            'values': {str(a): v for a, v in self.values.items()},
            'growth': {str(a): g for a, g in self.growth.items()},
        }


def _unbounded_growth(values: List[float]) -> bool:
    """Strictly increasing with non-shrinking increments and no plateau at the end"""
    if len(values) < 3:
        return False
    increments = np.diff(values)
    if not np.all(increments > 0):
        return False
    if increments[-1] <= MOMENT_PLATEAU_RTOL * abs(values[-1]):
        return False
    return bool(np.all(np.diff(increments) >= 0))


def moment_stability(params: ModelParams, n_max_values: Sequence[int],
                     a_values: Sequence[int] = (1, 2), tol: float = EIGEN_TOL,
                     method: str = "auto", seed: int = DEFAULT_SEED) -> MomentTable:
    """Ground-state number moments along the schedule, flagging growth without plateau"""
    values: Dict[int, List[float]] = {int(a): [] for a in a_values}
    for n in n_max_values:
        ground = ground_state_of_lower_fiber(params, Cutoffs(n_max=n, tol=tol, method=method, seed=seed))
        for a, v in moments(ground.psi, a_values).items():
            values[a].append(v)
    growth = {a: _unbounded_growth(v) for a, v in values.items()}
    if any(growth.values()):
        logger.warning(f"Number moments keep growing along cutoffs {list(n_max_values)}: {growth}")
    return MomentTable(n_max_values=list(n_max_values), values=values, growth=growth)
