"""Truncated bosonic Fock space: basis, sparse operators, pointwise annihilation"""
from fock.basis import FockBasis, FockVector, basis_dimension, enumerate_basis
from fock.operators import (
    SparseOp,
    annihilation,
    coherent_state,
    commutator,
    creation,
    dgamma,
    diagonal,
    exponential_vector,
    field,
    field_lower_bound,
    field_power,
    gamma_parity,
    hermiticity_defect,
    identity,
    mode_annihilator,
    number_operator,
    weyl,
)
from fock.pointwise import (
    PointwiseAnnihilation,
    dgamma_form,
    number_expectation,
    pointwise_annihilation,
)

__all__ = [
    'FockBasis',
    'FockVector',
    'basis_dimension',
    'enumerate_basis',
    'SparseOp',
    'annihilation',
    'coherent_state',
    'commutator',
    'creation',
    'dgamma',
    'diagonal',
    'exponential_vector',
    'field',
    'field_lower_bound',
    'field_power',
    'gamma_parity',
    'hermiticity_defect',
    'identity',
    'mode_annihilator',
    'number_operator',
    'weyl',
    'PointwiseAnnihilation',
    'dgamma_form',
    'number_expectation',
    'pointwise_annihilation',
]
