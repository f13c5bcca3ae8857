"""Annealer eigensolver for CI Hamiltonians with a classical annealing backend.

Typical use::

    from qae import CiHamiltonian, QaeConfig, run_qae, default_lambda_bracket

    h = CiHamiltonian(matrix)
    lo, hi = default_lambda_bracket(h)
    result = run_qae(h, QaeConfig(lo, hi))
"""
from .anneal import AnnealSchedule, BruteForceSampler, SampleSet, SimulatedAnnealingSampler
from .ci import (ActiveSpace, CiHamiltonian, FieldSpec, assemble_hamiltonian, generate_fci_basis,
                 perturbative_order, select_determinants, slater_condon_element)
from .encoding import EncodingConfig, QuboProblem, build_qubo, decode, encode, functional
from .errors import (CapacityError, ConfigError, ConflictError, DegenerateError, DomainError,
                     NoSolutionError, ParseError, QaeError)
from .ffm import DipoleResult, FfmInput, Geometry, assemble_pdm, central_difference
from .integrals import IntegralSet, parse_fcidump, read_fcidump, write_fcidump
from .oracle import exact_ground, spectrum
from .refine import rayleigh_energy, refine, steepest_descent
from .solver import QaeConfig, QaeResult, default_lambda_bracket, run_qae

__all__ = [
    "AnnealSchedule", "BruteForceSampler", "SampleSet", "SimulatedAnnealingSampler",
    "ActiveSpace", "CiHamiltonian", "FieldSpec", "assemble_hamiltonian", "generate_fci_basis",
    "perturbative_order", "select_determinants", "slater_condon_element",
    "EncodingConfig", "QuboProblem", "build_qubo", "decode", "encode", "functional",
    "CapacityError", "ConfigError", "ConflictError", "DegenerateError", "DomainError",
    "NoSolutionError", "ParseError", "QaeError",
    "DipoleResult", "FfmInput", "Geometry", "assemble_pdm", "central_difference",
    "IntegralSet", "parse_fcidump", "read_fcidump", "write_fcidump",
    "exact_ground", "spectrum", "rayleigh_energy", "refine", "steepest_descent",
    "QaeConfig", "QaeResult", "default_lambda_bracket", "run_qae",
]
