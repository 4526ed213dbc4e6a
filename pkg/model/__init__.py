"""Spin-boson Hamiltonian, fibers, parity decomposition and decoupled spectra"""
from model.hamiltonian import (
    SPIN_VALUES,
    OperatorBundle,
    SpinFockBasis,
    build_bundle,
    build_fiber,
    build_full,
    decompose,
    interaction_operator,
    parity_unitary,
    sigma_x_conjugate,
)
from model.decoupling import DecoupledSpectrum, coupled_fiber_spectrum, decoupled_spectrum

__all__ = [
    'SPIN_VALUES',
    'OperatorBundle',
    'SpinFockBasis',
    'build_bundle',
    'build_fiber',
    'build_full',
    'decompose',
    'interaction_operator',
    'parity_unitary',
    'sigma_x_conjugate',
    'DecoupledSpectrum',
    'coupled_fiber_spectrum',
    'decoupled_spectrum',
]
