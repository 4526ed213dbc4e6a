"""One-boson space: modes, couplings, model parameters and hypotheses"""
from onebody.modes import (
    CouplingFamily,
    ModelParams,
    ModeSet,
    ModeTag,
    coupled_support,
    infrared_norm,
    inner_product,
    masses,
)
from onebody.hypotheses import (
    HypothesisReport,
    HypothesisResult,
    HypothesisValidator,
    leading_terms,
    phase_function,
    validate_hypotheses,
)

__all__ = [
    'CouplingFamily',
    'ModelParams',
    'ModeSet',
    'ModeTag',
    'coupled_support',
    'infrared_norm',
    'inner_product',
    'masses',
    'HypothesisReport',
    'HypothesisResult',
    'HypothesisValidator',
    'leading_terms',
    'phase_function',
    'validate_hypotheses',
]
