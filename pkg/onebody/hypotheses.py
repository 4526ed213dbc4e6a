"""
Leading terms, phase functions and the five model hypotheses
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from config.settings import HYPOTHESIS_RTOL
from onebody.modes import CouplingFamily, ModelParams, infrared_norm, masses


HYPOTHESES = ("hyp1", "hyp2", "hyp3", "hyp4", "hyp5")


@dataclass(frozen=True)
class HypothesisResult:
    """Outcome of one hypothesis check"""
    passed: bool
    reason: str


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    """Per-hypothesis verdicts plus the derived structural data"""
    results: Dict[str, HypothesisResult]
    leading_terms: FrozenSet[int]
    phase_function: Optional[np.ndarray] = None
    domain_norms: Dict[str, List[float]] = field(default_factory=dict)

    def passed(self, name: str) -> bool:
        return self.results[name].passed

    def passes_all(self, names: Tuple[str, ...] = HYPOTHESES) -> bool:
        return all(self.results[name].passed for name in names)

    def failures(self) -> List[str]:
        return [f"{name}: {res.reason}" for name, res in self.results.items() if not res.passed]

    def to_dict(self) -> Dict:
        phase = None
        if self.phase_function is not None:
            phase = [[float(z.real), float(z.imag)] for z in self.phase_function]
        return {
            'results': {name: {'passed': r.passed, 'reason': r.reason} for name, r in self.results.items()},
            'leading_terms': sorted(self.leading_terms),
            'phase_function': phase,
            'domain_norms': self.domain_norms,
        }


def leading_terms(coupling: CouplingFamily) -> FrozenSet[int]:
    """
    L(f) = {i in 2..2n : f_i != f_j for all j > i}, with exact equality of the
    stored amplitude sequences. 2n is always a member.
    """
    top = 2 * coupling.order
    vectors = coupling.vectors
    return frozenset(
        i for i in range(2, top + 1)
        if not any(np.array_equal(vectors[i - 1], vectors[j - 1]) for j in range(i + 1, top + 1))
    )


def phase_function(coupling: CouplingFamily, rtol: float = HYPOTHESIS_RTOL) -> Optional[np.ndarray]:
    """
    Per-mode unit complex h with h_k f_i(k) real for every i, or None.

    The phase of each mode is taken from its largest entry; every other entry
    must share it modulo pi. Canonical choice: Re h > 0, or h = i.
    """
    vectors = coupling.vectors
    scale = float(np.max(np.abs(vectors))) if vectors.size else 0.0
    h = np.ones(coupling.mode_count, dtype=complex)
    if scale == 0.0:
        return h

    for k in range(coupling.mode_count):
        column = vectors[:, k]
        ref = column[np.argmax(np.abs(column))]
        if abs(ref) <= rtol * scale:
            continue
        phase = np.conj(ref) / abs(ref)
        if phase.real < 0 or (phase.real == 0 and phase.imag < 0):
            phase = -phase
        if np.max(np.abs((phase * column).imag)) > rtol * scale:
            return None
        h[k] = phase
    return h


class HypothesisValidator:
    """Validates (alpha, f, omega) against Hypotheses 1-5"""

    def __init__(self, rtol: float = HYPOTHESIS_RTOL):
        self.rtol = rtol
        self.results: Dict[str, HypothesisResult] = {}

    def validate_all(self, params: ModelParams) -> HypothesisReport:
        """Run all checks; failures are carried in the report, never raised"""
        self.results = {}
        leading = leading_terms(params.coupling)
        phase = phase_function(params.coupling, self.rtol)

        self._check_hyp1(params, leading)
        self._check_hyp2(params)
        self._check_hyp3(params)
        self._check_hyp4(params, phase)
        self._check_hyp5(params)

        return HypothesisReport(
            results=dict(self.results),
            leading_terms=leading,
            phase_function=phase,
            domain_norms=self._domain_norms(params),
        )

    def _check_hyp1(self, params: ModelParams, leading: FrozenSet[int]):
        issues = []
        odd = sorted(i for i in leading if i % 2)
        if odd:
            issues.append(f"leading terms {odd} are odd")
        for i in sorted(leading - {2}):
            if not params.a(i) > 0:
                issues.append(f"alpha_{i} = {params.a(i)} must be positive (leading term)")
        if 2 in leading and params.a(2) < 0:
            issues.append(f"alpha_2 = {params.a(2)} must be nonnegative (2 is a leading term)")
        if np.any(params.modes.energies <= 0):
            issues.append("omega must be positive on every mode")

        if issues:
            self.results['hyp1'] = HypothesisResult(False, "; ".join(issues))
        else:
            self.results['hyp1'] = HypothesisResult(
                True, f"leading terms {sorted(leading)} even with admissible alpha; omega > 0 on a finite grid"
            )

    def _check_hyp2(self, params: ModelParams):
        # Sufficient per-mode condition: conj(f_i(k)) f_j(k) real for all i, j, k.
        # Stricter than the integrated condition, which may hold by cancellation
        # across modes sharing an omega value.
        vectors = params.coupling.vectors
        scale = float(np.max(np.abs(vectors))) ** 2 if vectors.size else 0.0
        products = np.conj(vectors)[:, None, :] * vectors[None, :, :]
        worst = float(np.max(np.abs(products.imag))) if products.size else 0.0
        if worst <= self.rtol * scale:
            self.results['hyp2'] = HypothesisResult(
                True, "per-mode products conj(f_i(k)) f_j(k) are real (sufficient condition)"
            )
        else:
            self.results['hyp2'] = HypothesisResult(
                False, f"per-mode products have imaginary part up to {worst:.3e} "
                       f"(sufficient condition only; integrated condition not examined)"
            )

    def _check_hyp3(self, params: ModelParams):
        if params.order <= 2:
            self.results['hyp3'] = HypothesisResult(True, f"n = {params.order} <= 2")
            return
        m, _ = masses(params.modes)
        if m > 0 and self.results['hyp2'].passed:
            self.results['hyp3'] = HypothesisResult(True, f"m = {m} > 0 and Hypothesis 2 holds")
        else:
            self.results['hyp3'] = HypothesisResult(False, f"n > 2 needs m > 0 (m = {m}) and Hypothesis 2")

    def _check_hyp4(self, params: ModelParams, phase: Optional[np.ndarray]):
        if params.order <= 2:
            self.results['hyp4'] = HypothesisResult(True, f"n = {params.order} <= 2")
        elif phase is not None:
            self.results['hyp4'] = HypothesisResult(True, "phase function exists")
        else:
            self.results['hyp4'] = HypothesisResult(False, "no phase function: coupling phases differ modulo pi")

    def _check_hyp5(self, params: ModelParams):
        self.results['hyp5'] = HypothesisResult(
            True, "f_j in D(omega^-1) is automatic for finitely many modes with omega > 0"
        )

    def _domain_norms(self, params: ModelParams) -> Dict[str, List[float]]:
        fs = [params.coupling.f(i) for i in range(1, 2 * params.order + 1)]
        return {
            'omega_minus_half': [infrared_norm(f, params.modes, 0.5) for f in fs],
            'omega_plus_half': [infrared_norm(f, params.modes, -0.5) for f in fs],
            'omega_minus_one': [infrared_norm(f, params.modes, 1.0) for f in fs],
        }


def validate_hypotheses(params: ModelParams) -> HypothesisReport:
    """Deterministic, side-effect free check of Hypotheses 1-5"""
    return HypothesisValidator().validate_all(params)
