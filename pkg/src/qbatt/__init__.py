"""Collision-model simulator for quantum batteries charged by engineered dissipation."""

from .collision import CollisionModel, StepRecord, Trajectory, evolve, fixed_point, local_thermo, step, superoperator_matrix
from .equilibrium import check_equilibrium, classify, find_H0, solve_H0
from .ergotropy import charging_report, ergotropy, ergotropy_bound, narrow_band_scan, random_unitary_dominance
from .hamiltonians import ModelSpec, build_inversion_protocol, build_single_qubit, build_two_qubit, pauli
from .operators import gibbs, partial_trace_ancilla, rel_entropy, tensor, unitary_from_hamiltonian, vn_entropy

__version__ = "0.1.0"
