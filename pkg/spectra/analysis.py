"""
Ground-state structure, excited-state criterion, HVZ threshold and cutoff convergence

E_minus is the ground energy of F_{-|eta|}, E_plus that of F_{|eta|}. The full
ground energy equals E_minus and, for eta != 0, the full ground state lives in
the e_{-sign(eta)} block after conjugation by U.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.linalg import eigvalsh

from config.settings import (
    DEFAULT_SEED,
    DEGENERACY_RTOL,
    DENSE_DIMENSION_LIMIT,
    EIGEN_TOL,
    HVZ_TOL,
    LEAKAGE_TOL,
    STRICT_GAP_FACTOR,
    STRICT_GAP_MIN_ETA,
    STRICT_GAP_MIN_MASS,
    WINDOW_TOL,
)
from fock.basis import FockBasis, basis_dimension, enumerate_basis
from model.decoupling import coupled_fiber_spectrum, decoupled_spectrum
from model.hamiltonian import build_bundle, build_fiber, decompose
from onebody.hypotheses import validate_hypotheses
from onebody.modes import ModelParams, masses
from spectra.eigensolver import SpectralResult, degeneracy, eigensolve
from utils.errors import PreconditionError, ReasonCode


logger = logging.getLogger(__name__)

REQUIRED_HYPOTHESES = ("hyp1", "hyp2", "hyp3", "hyp4")

ScheduleEntry = Union[int, Tuple[int, Optional[int]]]


@dataclass(frozen=True)
class Cutoffs:
    """Truncation and solver settings shared by the analysis operations"""
    n_max: int
    eigen_count: int = 4
    tol: float = EIGEN_TOL
    method: str = "auto"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1 (got {self.n_max})")
        if self.eigen_count < 1:
            raise ValueError(f"eigen_count must be >= 1 (got {self.eigen_count})")

    def with_n_max(self, n_max: int) -> "Cutoffs":
        return Cutoffs(n_max=n_max, eigen_count=self.eigen_count, tol=self.tol,
                       method=self.method, seed=self.seed)


def _fiber_signs(eta: float) -> Tuple[int, int]:
    """(sign of F_{-|eta|}, sign of F_{|eta|}) relative to F_{+eta}"""
    return (-1, 1) if eta >= 0 else (1, -1)


def _require_hypotheses(params: ModelParams):
    report = validate_hypotheses(params)
    if not report.passes_all(REQUIRED_HYPOTHESES):
        raise PreconditionError("; ".join(report.failures()))


def _solve(op, cutoffs: Cutoffs, count: int) -> SpectralResult:
    return eigensolve(op, count=count, tol=cutoffs.tol, method=cutoffs.method, seed=cutoffs.seed)


def _slack(cutoffs: Cutoffs, energy: float) -> float:
    return STRICT_GAP_FACTOR * cutoffs.tol * (1.0 + abs(energy))


@dataclass(frozen=True, eq=False)
class GroundStateReport:
    """Ground energies, degeneracy, parity-block membership and ordering"""
    eta: float
    n_max: int
    e_full: float
    e_minus: float
    e_plus: float
    gap: Optional[float]
    degeneracy: int
    block_weights: Dict[int, float]
    leakage: Optional[float]
    ordering_gap: float
    strict_gap_asserted: bool
    excited_state_flag: bool
    m: float
    m_ess: float
    offblock_norm: float
    violations: List[ReasonCode] = field(default_factory=list)
    ground_vector: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            'eta': self.eta,
            'n_max': self.n_max,
            'E_full': self.e_full,
            'E_minus': self.e_minus,
            'E_plus': self.e_plus,
            'gap': self.gap,
            'degeneracy': self.degeneracy,
            'block_weights': {str(k): v for k, v in self.block_weights.items()},
            'leakage': self.leakage,
            'ordering_gap': self.ordering_gap,
            'strict_gap_asserted': self.strict_gap_asserted,
            'excited_state_flag': self.excited_state_flag,
            'm': self.m,
            'm_ess': None if np.isinf(self.m_ess) else self.m_ess,
            'offblock_norm': self.offblock_norm,
            'violations': [v.value for v in self.violations],
        }


def ground_state_analysis(params: ModelParams, cutoffs: Cutoffs) -> GroundStateReport:
    """Solve both fibers and the full operator at one cutoff and check the ground-state picture"""
    _require_hypotheses(params)
    basis = enumerate_basis(params.modes.count, cutoffs.n_max)
    bundle = build_bundle(params, basis)
    offblock, _ = decompose(bundle)

    plus = _solve(bundle.f_plus, cutoffs, 1).ground_energy
    minus = _solve(bundle.f_minus, cutoffs, 1).ground_energy
    e_minus, e_plus = (minus, plus) if params.eta >= 0 else (plus, minus)

    full = _solve(bundle.h_full, cutoffs, max(cutoffs.eigen_count, 3))
    e_full = full.ground_energy
    degenerate = degeneracy(full.eigenvalues, DEGENERACY_RTOL)
    gap = float(full.eigenvalues[degenerate] - e_full) if degenerate < full.eigenvalues.size else None

    violations: List[ReasonCode] = []
    if abs(e_full - min(e_minus, e_plus)) > _slack(cutoffs, e_full):
        violations.append(ReasonCode.ORDERING)

    ground = full.vector(0)
    rotated = bundle.u_parity.apply(ground)
    spin_basis = bundle.spin_basis
    weights = {s: float(np.sum(np.abs(rotated[spin_basis.block(s)]) ** 2)) for s in (1, -1)}

    leakage = None
    if params.eta != 0:
        expected = -int(np.sign(params.eta))
        leakage = weights[-expected]
        if degenerate != 1:
            violations.append(ReasonCode.DEGENERACY)
        elif leakage > LEAKAGE_TOL:
            violations.append(ReasonCode.LEAKAGE)
    elif degenerate != 2:
        violations.append(ReasonCode.DEGENERACY)

    ordering_gap = e_plus - e_minus
    slack = _slack(cutoffs, e_minus)
    if ordering_gap < -slack or ordering_gap > 2 * abs(params.eta) + slack:
        violations.append(ReasonCode.ORDERING)

    m, m_ess = masses(params.modes)
    strict = m >= STRICT_GAP_MIN_MASS and abs(params.eta) >= STRICT_GAP_MIN_ETA
    if strict and not ordering_gap > slack:
        violations.append(ReasonCode.ORDERING)

    report = GroundStateReport(
        eta=params.eta,
        n_max=cutoffs.n_max,
        e_full=e_full,
        e_minus=e_minus,
        e_plus=e_plus,
        gap=gap,
        degeneracy=degenerate,
        block_weights=weights,
        leakage=leakage,
        ordering_gap=ordering_gap,
        strict_gap_asserted=strict,
        excited_state_flag=2 * abs(params.eta) < m_ess,
        m=m,
        m_ess=m_ess,
        offblock_norm=offblock,
        violations=sorted(set(violations), key=lambda r: r.value),
        ground_vector=ground,
    )
    logger.info(
        f"Ground state eta={params.eta} N_max={cutoffs.n_max}: E={e_full:.12e} "
        f"deg={degenerate} violations={[v.value for v in report.violations]}"
    )
    return report


@dataclass(frozen=True)
class ExcitedStateCheck:
    """Whether 2|eta| < m_ess and, if so, whether E_plus lies in (E, E + m_ess]"""
    flag: bool
    e_full: float
    e_plus: float
    window: Tuple[float, float]
    in_window: Optional[bool]
    status: str
    reason: Optional[ReasonCode] = None

    def to_dict(self) -> Dict:
        low, high = self.window
        return {
            'flag': self.flag,
            'E_full': self.e_full,
            'E_plus': self.e_plus,
            'window': [low, None if np.isinf(high) else high],
            'in_window': self.in_window,
            'status': self.status,
            'reason': self.reason.value if self.reason else None,
        }


def excited_state_check(params: ModelParams, cutoffs: Cutoffs,
                        report: Optional[GroundStateReport] = None) -> ExcitedStateCheck:
    """Excited-state criterion; a failed window is reported, not raised"""
    m, m_ess = masses(params.modes)
    if not m > 0:
        raise PreconditionError(f"excited-state check needs m > 0 (got {m})")
    if params.eta == 0:
        raise PreconditionError("excited-state check needs eta != 0")

    if report is None or report.n_max != cutoffs.n_max:
        report = ground_state_analysis(params, cutoffs)

    flag = 2 * abs(params.eta) < m_ess
    window = (report.e_full, report.e_full + m_ess)
    if not flag:
        return ExcitedStateCheck(flag, report.e_full, report.e_plus, window, None, "not_applicable")

    in_window = window[0] - WINDOW_TOL < report.e_plus <= window[1] + WINDOW_TOL
    if in_window:
        return ExcitedStateCheck(flag, report.e_full, report.e_plus, window, True, "pass")
    logger.warning(f"E_plus={report.e_plus:.12e} outside ({window[0]:.12e}, {window[1]:.12e}]")
    return ExcitedStateCheck(flag, report.e_full, report.e_plus, window, False, "fail",
                             ReasonCode.WINDOW_VIOLATED)


@dataclass(frozen=True)
class HvzEntry:
    """One lattice point E_{(-1)^q eta} + q*lambda searched in spec(F_{+eta})"""
    mode: int
    energy: float
    quanta: int
    target: float
    distance: float
    found: bool


@dataclass(frozen=True, eq=False)
class HvzReport:
    """Threshold values and the decoupled-mode lattice points"""
    e_full: float
    m_ess: float
    threshold: float
    fiber_threshold: float
    isolation_level: float
    entries: List[HvzEntry]

    @property
    def passed(self) -> bool:
        return all(entry.found for entry in self.entries)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> Dict:
        return {
            'E_full': self.e_full,
            'm_ess': self.m_ess,
            'threshold': self.threshold,
            'fiber_threshold': self.fiber_threshold,
            'isolation_level': self.isolation_level,
            'entries': [entry.__dict__ for entry in self.entries],
            'status': self.status,
        }


def _plus_fiber_spectrum(params: ModelParams, others: List[int], n_max: int) -> np.ndarray:
    if basis_dimension(params.modes.count, n_max) <= DENSE_DIMENSION_LIMIT:
        basis = enumerate_basis(params.modes.count, n_max)
        return eigvalsh(build_fiber(params, basis, 1).toarray())
    return decoupled_spectrum(params, others, n_max).eigenvalues


def hvz_threshold_diagnostic(params: ModelParams, cutoffs: Cutoffs,
                             report: Optional[GroundStateReport] = None) -> HvzReport:
    """
    For each essential mode (decoupled there) and q = 1, 2: the ground energy of
    F_{(-1)^q eta} on the remaining modes at cutoff N_max - q, plus q*lambda,
    must appear in spec(F_{+eta}).
    """
    essential = params.modes.essential_indices
    if not essential:
        raise PreconditionError("HVZ diagnostic needs at least one essential mode")

    if report is None or report.n_max != cutoffs.n_max:
        report = ground_state_analysis(params, cutoffs)
    m, m_ess = masses(params.modes)

    entries = []
    for mode in essential:
        others = [k for k in range(params.modes.count) if k != mode]
        decoupled = params.with_coupling_support(others)
        spectrum = _plus_fiber_spectrum(decoupled, others, cutoffs.n_max)
        energy = float(params.modes.energies[mode])
        for q in (1, 2):
            if q > cutoffs.n_max:
                continue
            base = coupled_fiber_spectrum(decoupled, others, cutoffs.n_max - q, (-1) ** q)[0]
            target = float(base + q * energy)
            distance = float(np.min(np.abs(spectrum - target)))
            entries.append(HvzEntry(mode, energy, q, target, distance, distance <= HVZ_TOL * (1.0 + abs(target))))

    hvz = HvzReport(
        e_full=report.e_full,
        m_ess=m_ess,
        threshold=report.e_full + m_ess,
        fiber_threshold=report.e_minus + m_ess,
        isolation_level=min(m_ess + report.e_minus, report.e_plus + m_ess + m),
        entries=entries,
    )
    if not hvz.passed:
        missing = [(e.mode, e.quanta) for e in entries if not e.found]
        logger.warning(f"HVZ lattice points missing for (mode, q) = {missing}")
    return hvz


@dataclass(frozen=True)
class ConvergenceRow:
    n_max: int
    coupled_modes: Optional[int]
    e_minus: float
    e_plus: float
    d_minus: Optional[float]
    d_plus: Optional[float]
    boundary_weight: float


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    """Ground energies along a cutoff / coupling-support schedule"""
    rows: List[ConvergenceRow]
    non_cauchy: bool

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.__dict__ for row in self.rows])

    def to_dict(self) -> Dict:
        return {'rows': [row.__dict__ for row in self.rows], 'non_cauchy': self.non_cauchy}


def _normalize_schedule(schedule: Sequence[ScheduleEntry]) -> List[Tuple[int, Optional[int]]]:
    entries = [(int(e), None) if np.isscalar(e) else (int(e[0]), None if e[1] is None else int(e[1]))
               for e in schedule]
    if not entries:
        raise ValueError("convergence schedule is empty")
    cutoffs = [n for n, _ in entries]
    if any(b < a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError(f"convergence schedule must be monotone in the cutoff (got {cutoffs})")
    return entries


def _boundary_weight(basis: FockBasis, vector: np.ndarray) -> float:
    """Ground-state mass in the top two grades"""
    grades = basis.grades
    return float(np.sum(np.abs(vector[grades >= basis.cutoff - 1]) ** 2))


def _growing(diffs: List[float], slack: float) -> bool:
    magnitudes = [abs(d) for d in diffs]
    return any(later > earlier + slack for earlier, later in zip(magnitudes, magnitudes[1:]))


def convergence_study(params: ModelParams, schedule: Sequence[ScheduleEntry],
                      tol: float = EIGEN_TOL, method: str = "auto",
                      seed: int = DEFAULT_SEED) -> ConvergenceTable:
    """
    Entries are N_max or (N_max, k); k keeps the coupling on the first k modes
    only (f^k = 1_{A_k} f), None keeps all of it.
    """
    entries = _normalize_schedule(schedule)
    minus_sign, plus_sign = _fiber_signs(params.eta)

    rows: List[ConvergenceRow] = []
    for n_max, coupled in entries:
        model = params if coupled is None else params.with_coupling_support(range(coupled))
        basis = enumerate_basis(model.modes.count, n_max)
        options = Cutoffs(n_max=n_max, tol=tol, method=method, seed=seed)
        lower = _solve(build_fiber(model, basis, minus_sign), options, 1)
        upper = _solve(build_fiber(model, basis, plus_sign), options, 1)
        previous = rows[-1] if rows else None
        rows.append(ConvergenceRow(
            n_max=n_max,
            coupled_modes=coupled,
            e_minus=lower.ground_energy,
            e_plus=upper.ground_energy,
            d_minus=None if previous is None else lower.ground_energy - previous.e_minus,
            d_plus=None if previous is None else upper.ground_energy - previous.e_plus,
            boundary_weight=_boundary_weight(basis, lower.vector(0)),
        ))
        logger.debug(f"Convergence N_max={n_max} k={coupled}: E_minus={lower.ground_energy:.12e}")

    slack = STRICT_GAP_FACTOR * tol * (1.0 + abs(rows[-1].e_minus))
    d_minus = [r.d_minus for r in rows[1:]]
    d_plus = [r.d_plus for r in rows[1:]]
    non_cauchy = _growing(d_minus, slack) or _growing(d_plus, slack)
    if non_cauchy:
        logger.warning(f"Ground energies are not settling along cutoffs {[r.n_max for r in rows]}")
    return ConvergenceTable(rows=rows, non_cauchy=non_cauchy)
