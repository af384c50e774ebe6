"""Repeated-interaction map, per-step thermodynamics and fixed points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np

from .errors import DegenerateFixedPointError, DimensionError, NumericalError, ValidationError
from .operators import (
    as_density,
    as_hermitian,
    commutator,
    evolve_unitary,
    fro,
    gibbs,
    herm_eig,
    hermitize,
    partial_trace_ancilla,
    partial_trace_system,
    rel_entropy,
    renormalize,
    tensor,
    trace_distance,
    unitary_from_hamiltonian,
    vn_entropy,
)

FIXED_POINT_TOL = 1e-10
NESS_SIGMA_THRESHOLD = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CollisionModel:
    """Battery H_S colliding with fresh thermal ancillas H_A through V.

    Each collision lasts ``tau`` and is followed by a free evolution of the
    battery for ``gap`` (T - tau); gap = 0 is the plain protocol.
    """

    H_S: np.ndarray
    H_A: np.ndarray
    V: np.ndarray
    beta: float
    tau: float
    gap: float = 0.0

    def __post_init__(self):
        hs = as_hermitian(self.H_S, "H_S")
        ha = as_hermitian(self.H_A, "H_A")
        v = as_hermitian(self.V, "V")
        if v.shape[0] != hs.shape[0] * ha.shape[0]:
            raise DimensionError(
                f"V has dimension {v.shape[0]}, expected {hs.shape[0]}*{ha.shape[0]}"
            )
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValidationError(f"beta must be finite and positive, got {self.beta!r}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValidationError(f"tau must be finite and positive, got {self.tau!r}")
        if not (self.gap >= 0 and math.isfinite(self.gap)):
            raise ValidationError(f"gap must be finite and >= 0, got {self.gap!r}")
        object.__setattr__(self, "H_S", _frozen(hs))
        object.__setattr__(self, "H_A", _frozen(ha))
        object.__setattr__(self, "V", _frozen(v))

    @property
    def dS(self) -> int:
        return self.H_S.shape[0]

    @property
    def dA(self) -> int:
        return self.H_A.shape[0]

    def with_gap(self, gap: float) -> "CollisionModel":
        return CollisionModel(self.H_S, self.H_A, self.V, self.beta, self.tau, gap)

    @cached_property
    def H_free(self) -> np.ndarray:
        """H_S (x) 1 + 1 (x) H_A."""
        return tensor(self.H_S, np.eye(self.dA)) + tensor(np.eye(self.dS), self.H_A)

    @cached_property
    def U(self) -> np.ndarray:
        return unitary_from_hamiltonian(self.H_free + self.V, self.tau)

    @cached_property
    def omega(self) -> np.ndarray:
        """Ancilla thermal state omega_beta(H_A)."""
        return gibbs(self.H_A, self.beta)

    @cached_property
    def log_omega(self) -> np.ndarray:
        """log omega_beta(H_A) from the spectrum of H_A, exact for tiny populations."""
        E, v = herm_eig(self.H_A)
        x = -self.beta * (E - E[0])
        return (v * (x - np.log(np.sum(np.exp(x))))) @ v.conj().T

    @cached_property
    def U_gap(self) -> Optional[np.ndarray]:
        if self.gap == 0:
            return None
        return unitary_from_hamiltonian(self.H_S, self.gap)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """One application of the map (collision then free evolution), no bookkeeping."""
        out = partial_trace_ancilla(evolve_unitary(self.U, tensor(rho, self.omega)), self.dS, self.dA)
        if self.U_gap is not None:
            out = evolve_unitary(self.U_gap, out)
        return hermitize(out)


@dataclass(frozen=True, eq=False)
class StepRecord:
    """Thermodynamic ledger of one collision (energies in units of H, entropies in nats)."""

    n: int
    rho_after: np.ndarray
    W: float
    Q: float
    dE: float
    dS: float
    Sigma: float

    def check(self, beta: float) -> None:
        """Raise NumericalError if first law, entropy balance or second law fail."""
        if abs(self.dE - (self.W + self.Q)) > 1e-11 * (1 + abs(self.dE)):
            raise NumericalError(f"step {self.n}: first law violated")
        if math.isfinite(self.Sigma):
            if abs(self.dS - (self.Sigma + beta * self.Q)) > 1e-10:
                raise NumericalError(f"step {self.n}: entropy balance violated")
            if self.Sigma < -1e-10:
                raise NumericalError(f"step {self.n}: negative entropy production {self.Sigma!r}")


@dataclass
class Trajectory:
    model: CollisionModel
    initial: np.ndarray
    records: List[StepRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.records[-1].rho_after if self.records else self.initial

    @property
    def W(self) -> float:
        return math.fsum(r.W for r in self.records)

    @property
    def Q(self) -> float:
        return math.fsum(r.Q for r in self.records)

    @property
    def Sigma(self) -> float:
        return math.fsum(r.Sigma for r in self.records)

    @property
    def dE(self) -> float:
        return math.fsum(r.dE for r in self.records)


def _check_state(model: CollisionModel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dS, model.dS):
        raise DimensionError(f"state has shape {rho.shape}, expected ({model.dS}, {model.dS})")
    return as_density(rho)


def step(model: CollisionModel, rho, n: int = 1):
    """One collision.

    Returns ``(rho_next, record)``.  The record is computed from the composite
    state right after the collision; the free evolution that follows (when
    ``model.gap > 0``) commutes with H_S and contributes nothing to W, Q, dE, dS.
    """
    rho = _check_state(model, rho)
    dS_, dA = model.dS, model.dA
    before = tensor(rho, model.omega)
    after = evolve_unitary(model.U, before)
    rho_s = hermitize(partial_trace_ancilla(after, dS_, dA))
    rho_a = hermitize(partial_trace_system(after, dS_, dA))

    W = float(np.trace(model.H_free @ (after - before)).real)
    Q = -float(np.trace(model.H_A @ (rho_a - model.omega)).real)
    dE = float(np.trace(model.H_S @ (rho_s - rho)).real)
    dS = vn_entropy(rho_s) - vn_entropy(rho)
    # D(after || rho_s (x) omega) with log(rho_s (x) omega) = log rho_s (x) 1 + 1 (x) log omega;
    # diagonalizing the product directly loses the small eigenvalues of omega
    Sigma = vn_entropy(rho_s) - vn_entropy(after) - float(np.trace(rho_a @ model.log_omega).real)

    rho_next = rho_s
    if model.U_gap is not None:
        rho_next = hermitize(evolve_unitary(model.U_gap, rho_s))
    rho_next = renormalize(rho_next)
    return rho_next, StepRecord(n, rho_next, W, Q, dE, dS, Sigma)


def evolve(model: CollisionModel, rho0, max_steps: int = 1_000_000, conv_tol: float = 1e-12) -> Trajectory:
    """Iterate :func:`step` until successive states are within ``conv_tol`` in trace distance."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    rho = _check_state(model, rho0)
    traj = Trajectory(model, rho)
    for n in range(1, max_steps + 1):
        rho_next, rec = step(model, rho, n)
        traj.records.append(rec)
        if trace_distance(rho, rho_next) <= conv_tol:
            traj.converged = True
            break
        rho = rho_next
    return traj


def superoperator_matrix(model: CollisionModel) -> np.ndarray:
    """Matrix of the per-step map acting on row-major vectorized states.

    ``S @ rho.reshape(-1)`` equals ``model.apply(rho).reshape(-1)``; the free
    evolution after each collision is included when ``model.gap > 0``.
    """
    d = model.dS
    S = np.empty((d * d, d * d), dtype=complex)
    for k in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[k] = 1.0
        X = e.reshape(d, d)
        out = partial_trace_ancilla(evolve_unitary(model.U, tensor(X, model.omega)), d, model.dA)
        if model.U_gap is not None:
            out = evolve_unitary(model.U_gap, out)
        S[:, k] = out.reshape(-1)
    return S


def fixed_point_multiplicity(model: CollisionModel, tol: float = 1e-9) -> int:
    """Number of eigenvalues of the superoperator within ``tol`` of 1."""
    lam = np.linalg.eigvals(superoperator_matrix(model))
    return int(np.sum(np.abs(lam - 1.0) < tol))


def _fixed_point_spectral(model: CollisionModel) -> np.ndarray:
    d = model.dS
    S = superoperator_matrix(model)
    lam, vecs = np.linalg.eig(S)
    near = np.abs(lam - 1.0) < 1e-9
    mult = int(np.sum(near))
    if mult > 1:
        raise DegenerateFixedPointError(mult)
    if mult == 0:
        raise NumericalError("superoperator has no eigenvalue 1")
    # refine with the trace-constrained least-squares system (S - 1) v = 0, Tr v = 1
    A = np.vstack([S - np.eye(d * d), np.eye(d).reshape(1, -1)])
    rhs = np.zeros(d * d + 1, dtype=complex)
    rhs[-1] = 1.0
    v, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return v.reshape(d, d)


def _fixed_point_iterate(model: CollisionModel, max_steps: int = 1_000_000, tol: float = 1e-15) -> np.ndarray:
    rho = np.eye(model.dS, dtype=complex) / model.dS
    for _ in range(max_steps):
        nxt = model.apply(rho)
        if trace_distance(rho, nxt) <= tol:
            return nxt
        rho = nxt
    return rho


def fixed_point(model: CollisionModel, method: str = "spectral") -> np.ndarray:
    """Invariant state pi = E(pi) of the per-step map.

    ``spectral`` solves the superoperator eigenproblem and raises
    DegenerateFixedPointError when eigenvalue 1 is not simple; ``iterate``
    applies the map from I/d until it stops moving.
    """
    if method == "spectral":
        pi = _fixed_point_spectral(model)
    elif method == "iterate":
        pi = _fixed_point_iterate(model)
    else:
        raise ValueError(f"unknown fixed-point method {method!r}")
    pi = hermitize(pi)
    pi = pi / np.trace(pi).real
    pi = renormalize(pi)
    gap = trace_distance(model.apply(pi), pi)
    if gap > FIXED_POINT_TOL:
        raise NumericalError(f"fixed point not converged: ||E(pi) - pi||_tr = {gap:.3e}")
    return pi


def local_thermo(H_S, H0, rho_before, rho_after, pi, tol: float = 1e-10):
    """Heat, work and entropy production from system operators only.

    Valid for maps whose equilibrium operator H0 commutes with H_S:
    Q = Tr[H0 (rho' - rho)], W = Tr[(H_S - H0)(rho' - rho)],
    Sigma = D(rho || pi) - D(rho' || pi).  Returns ``(Q, W, Sigma)``.
    """
    H_S = as_hermitian(H_S, "H_S")
    H0 = as_hermitian(H0, "H0")
    res = fro(commutator(H0, H_S))
    if res > tol * (1.0 + fro(H0) * fro(H_S)):
        raise ValidationError(f"[H0, H_S] != 0 (residual {res:.3e})")
    drho = np.asarray(rho_after) - np.asarray(rho_before)
    Q = float(np.trace(H0 @ drho).real)
    W = float(np.trace((H_S - H0) @ drho).real)
    Sigma = rel_entropy(rho_before, pi) - rel_entropy(rho_after, pi)
    return Q, W, Sigma


def sigma_at(model: CollisionModel, rho) -> float:
    """Entropy production of one collision starting from ``rho``."""
    return step(model, rho)[1].Sigma
