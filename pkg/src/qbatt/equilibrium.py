"""Equilibrium operators: certification, construction and map classification.

A collision map has an equilibrium when its unitary commutes with H0 + H_A for
some system operator H0; the invariant state is then omega_beta(H0) and
sustaining it costs no work.  Otherwise the invariant state is a NESS kept up
by dissipated work W = -Q = Sigma / beta per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .collision import NESS_SIGMA_THRESHOLD, CollisionModel, fixed_point, sigma_at
from .errors import DimensionError
from .operators import as_hermitian, commutator, fro, gibbs, herm_eig, tensor, trace_distance

CERT_TOL = 1e-9


@dataclass(eq=False)
class EquilibriumCertificate:
    H0: np.ndarray
    residual_U: float
    residual_HS: float
    residual_V: float
    pi: np.ndarray
    fixed_point_gap: float
    scale: float

    @property
    def valid(self) -> bool:
        return self.residual_U <= CERT_TOL * self.scale and self.fixed_point_gap <= CERT_TOL

    @property
    def sufficient(self) -> bool:
        """Whether [H0, H_S] = 0 and [H0 + H_A, V] = 0 hold to tolerance."""
        return self.residual_HS <= CERT_TOL * self.scale and self.residual_V <= CERT_TOL * self.scale


def check_equilibrium(model: CollisionModel, H0) -> EquilibriumCertificate:
    """Residuals of the equilibrium condition for a candidate H0.

    Validity rests on [U, H0 + H_A] = 0 and on omega_beta(H0) actually being
    invariant; the two commutator residuals of the sufficient conditions are
    reported but not required.
    """
    H0 = as_hermitian(H0, "H0")
    if H0.shape != model.H_S.shape:
        raise DimensionError(f"H0 has shape {H0.shape}, expected {model.H_S.shape}")
    K = tensor(H0, np.eye(model.dA)) + tensor(np.eye(model.dS), model.H_A)
    pi = gibbs(H0, model.beta)
    return EquilibriumCertificate(
        H0=H0,
        residual_U=fro(commutator(model.U, K)),
        residual_HS=fro(commutator(H0, model.H_S)),
        residual_V=fro(commutator(K, model.V)),
        pi=pi,
        fixed_point_gap=trace_distance(model.apply(pi), pi),
        scale=max(1.0, fro(K)),
    )


@dataclass(eq=False)
class H0Solution:
    """Outcome of the linear solve for H0 in the commutant of H_S."""

    H0: Optional[np.ndarray]
    residual: float
    threshold: float
    null_space_dim: int
    degenerate_blocks: List[int]


def _eigen_blocks(H_S: np.ndarray, tol: float = 1e-10):
    w, v = herm_eig(H_S)
    scale = max(1.0, float(np.max(np.abs(w))))
    blocks, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol * scale:
            blocks.append(v[:, start:k])
            start = k
    return blocks


def _commutant_basis(H_S: np.ndarray) -> tuple[list, list]:
    """Frobenius-orthonormal basis of Hermitian operators commuting with H_S."""
    basis = []
    blocks = _eigen_blocks(H_S)
    for vb in blocks:
        m = vb.shape[1]
        for k in range(m):
            basis.append(np.outer(vb[:, k], vb[:, k].conj()))
            for l in range(k + 1, m):
                kl = np.outer(vb[:, k], vb[:, l].conj())
                basis.append((kl + kl.conj().T) / math.sqrt(2))
                basis.append(1j * (kl - kl.conj().T) / math.sqrt(2))
    return basis, [vb.shape[1] for vb in blocks if vb.shape[1] > 1]


def solve_H0(model: CollisionModel) -> H0Solution:
    """Least-squares search for H0 with [H0, H_S] = 0 and [H0 + H_A, V] = 0.

    H0 is expanded over the commutant of H_S (diagonal projectors in the
    nondegenerate case, full Hermitian blocks inside degenerate eigenspaces)
    and [H0 (x) 1, V] = -[1 (x) H_A, V] is solved for the real coefficients.
    The minimal-norm solution is traceless; the identity is always in the
    null space and is not counted in ``null_space_dim``.
    """
    basis, degenerate = _commutant_basis(model.H_S)
    eyeA = np.eye(model.dA)
    cols = [commutator(tensor(B, eyeA), model.V).reshape(-1) for B in basis]
    A = np.array(cols).T
    b = -commutator(tensor(np.eye(model.dS), model.H_A), model.V).reshape(-1)
    A_r = np.vstack([A.real, A.imag])
    b_r = np.concatenate([b.real, b.imag])
    x, _, _, sv = np.linalg.lstsq(A_r, b_r, rcond=None)
    residual = float(np.linalg.norm(A_r @ x - b_r))
    threshold = max(1e-9 * float(np.linalg.norm(b_r)), 1e-12)

    smax = float(sv[0]) if len(sv) and sv[0] > 0 else 0.0
    rank = int(np.sum(sv > 1e-10 * smax)) if smax > 0 else 0
    null_dim = max(0, len(basis) - rank - 1)

    if residual > threshold:
        return H0Solution(None, residual, threshold, null_dim, degenerate)
    H0 = sum(c * B for c, B in zip(x, basis))
    H0 = H0 - np.trace(H0).real / model.dS * np.eye(model.dS)
    return H0Solution((H0 + H0.conj().T) / 2, residual, threshold, null_dim, degenerate)


def find_H0(model: CollisionModel) -> Optional[np.ndarray]:
    """Traceless equilibrium operator of the map, or None for a map without equilibrium."""
    return solve_H0(model).H0


@dataclass(eq=False)
class Classification:
    kind: str  # "equilibrium" or "ness"
    pi: np.ndarray
    sigma_rate: float
    certificate: Optional[EquilibriumCertificate] = None
    solution: Optional[H0Solution] = None

    @property
    def is_equilibrium(self) -> bool:
        return self.kind == "equilibrium"


def classify(model: CollisionModel) -> Classification:
    """Decide whether the map has an equilibrium or a nonequilibrium steady state."""
    sol = solve_H0(model)
    if sol.H0 is not None:
        cert = check_equilibrium(model, sol.H0)
        if cert.valid:
            return Classification("equilibrium", cert.pi, sigma_at(model, cert.pi), cert, sol)
    pi = fixed_point(model)
    sigma = sigma_at(model, pi)
    kind = "ness" if sigma > NESS_SIGMA_THRESHOLD else "equilibrium"
    return Classification(kind, pi, sigma, None, sol)
