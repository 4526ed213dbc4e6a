"""
Analytic bounds and closed forms

interaction_lower_bound certifies sum_{j>=2} alpha_j phi(f_j)^j >= C by
minimizing finitely many one-variable polynomials; the van Hove closed form
covers linear coupling at eta = 0.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import AbstractSet, List, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from onebody.modes import ModelParams, infrared_norm
from utils.errors import PreconditionError


logger = logging.getLogger(__name__)


def polynomial_minimum(coefficients: Sequence[float]) -> float:
    """
    Global minimum over R of a real polynomial with even degree and positive
    leading coefficient (coefficients in ascending order).
    """
    poly = Polynomial(np.asarray(coefficients, dtype=float)).trim()
    degree = poly.degree()
    if degree == 0:
        return float(poly.coef[0])
    if degree % 2 or poly.coef[-1] <= 0:
        raise PreconditionError(
            f"polynomial of degree {degree} with leading coefficient {poly.coef[-1]} is unbounded below"
        )

    slope = poly.deriv()
    candidates: List[float] = [0.0]
    for root in slope.roots():
        if abs(root.imag) > 1e-8 * (1.0 + abs(root)):
            continue
        x = float(root.real)
        # polish near-real roots where the derivative changes sign
        width = 1e-6 * (1.0 + abs(x))
        lo, hi = x - width, x + width
        if slope(lo) * slope(hi) < 0:
            x = brentq(slope, lo, hi, xtol=1e-15)
        candidates.append(x)
    return float(min(poly(x) for x in candidates))


def lower_bound_polynomials(alpha: Sequence[float], leading: AbstractSet[int]) -> List[np.ndarray]:
    """
    For each even i_b with alpha_{i_b} > 0: alpha_{i_b} X^{i_b} + sum_{j=2}^{i_b-1} a_j X^j
    with every a_j either 0 or alpha_j (ascending coefficient arrays).
    """
    alpha = np.asarray(alpha, dtype=float)
    top = alpha.size
    odd = sorted(i for i in leading if i % 2)
    if odd:
        raise PreconditionError(f"leading terms {odd} are odd")
    for i in sorted(set(leading) - {2}):
        if not alpha[i - 1] > 0:
            raise PreconditionError(f"alpha_{i} = {alpha[i - 1]} must be positive (leading term)")

    polynomials = []
    for i_b in range(2, top + 1, 2):
        if not alpha[i_b - 1] > 0:
            continue
        lower = [j for j in range(2, i_b) if alpha[j - 1] != 0]
        for mask in product((False, True), repeat=len(lower)):
            coef = np.zeros(i_b + 1)
            coef[i_b] = alpha[i_b - 1]
            for j, keep in zip(lower, mask):
                if keep:
                    coef[j] = alpha[j - 1]
            polynomials.append(coef)
    return polynomials


def interaction_lower_bound(alpha: Sequence[float], leading: AbstractSet[int]) -> float:
    """n * C_0 with C_0 = min(0, minimum over all lower-bound polynomials)"""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size // 2
    polynomials = lower_bound_polynomials(alpha, leading)
    c0 = min([0.0] + [polynomial_minimum(coef) for coef in polynomials])
    logger.debug(f"Interaction bound from {len(polynomials)} polynomials: C_0={c0:.12e}")
    return n * c0


@dataclass(frozen=True)
class VanHoveTarget:
    """Closed-form ground data of dGamma(omega) + alpha_1 phi(f_1)"""
    energy: float
    occupation: float
    displacement: np.ndarray


def van_hove_closed_form(params: ModelParams) -> VanHoveTarget:
    """
    E = -alpha_1^2 ||omega^{-1/2} f_1||^2, <N> = alpha_1^2 ||omega^{-1} f_1||^2 and
    coherent-state displacement h = -alpha_1 f_1 / omega.
    """
    if params.order != 1 or params.a(2) != 0 or params.eta != 0:
        raise PreconditionError("van Hove closed form needs n = 1, alpha_2 = 0 and eta = 0")
    alpha_1 = params.a(1)
    f_1 = params.coupling.f(1)
    return VanHoveTarget(
        energy=-alpha_1 ** 2 * infrared_norm(f_1, params.modes, 0.5) ** 2,
        occupation=alpha_1 ** 2 * infrared_norm(f_1, params.modes, 1.0) ** 2,
        displacement=-alpha_1 * f_1 / params.modes.energies,
    )
