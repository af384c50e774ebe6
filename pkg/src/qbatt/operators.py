"""Dense complex-operator kernel.

Operators are plain ``numpy`` arrays of shape ``(d, d)``.  Composite spaces are
always ordered system first, ancilla second, so the row index of
``tensor(a, b)`` is ``s * dA + a``.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, NumericalError, ValidationError

HERM_TOL = 1e-12
TRACE_TOL = 1e-12
POS_TOL = 1e-12
ZERO_EIG = 1e-15
NULL_EIG = 1e-12
NULL_WEIGHT = 1e-10


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_operator(a, name: str = "operator") -> np.ndarray:
    """Coerce to a finite square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def as_hermitian(a, name: str = "operator") -> np.ndarray:
    """Validate Hermiticity within tolerance and return the symmetrized matrix."""
    m = as_operator(a, name)
    scale = 1.0 + float(np.max(np.abs(m)))
    err = float(np.max(np.abs(m - m.conj().T)))
    if err > HERM_TOL * scale:
        raise ValidationError(f"{name} is not Hermitian (max asymmetry {err:.3e})")
    return hermitize(m)


def as_density(rho, name: str = "state") -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, PSD) and return it symmetrized."""
    m = as_hermitian(rho, name)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"{name} has trace {tr!r}, expected 1")
    lam_min = float(np.linalg.eigvalsh(m)[0])
    if lam_min < -POS_TOL:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return m


def renormalize(rho: np.ndarray) -> np.ndarray:
    """Re-symmetrize and clamp eigenvalues into [0, 1] after accumulated rounding."""
    w, v = np.linalg.eigh(hermitize(rho))
    if w[0] < -1e-9:
        raise NumericalError(f"state lost positivity (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, 1.0)
    out = (v * w) @ v.conj().T
    return hermitize(out / np.trace(out).real)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def tensor(a, b) -> np.ndarray:
    """Kronecker product, first factor = system."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _split(ab, dS: int, dA: int) -> np.ndarray:
    m = np.asarray(ab, dtype=complex)
    if m.shape != (dS * dA, dS * dA):
        raise DimensionError(f"operator of shape {m.shape} does not factor as {dS}x{dA}")
    return m.reshape(dS, dA, dS, dA)


def partial_trace_ancilla(ab, dS: int, dA: int) -> np.ndarray:
    """Tr_A of an operator on system (x) ancilla."""
    return np.einsum("iaja->ij", _split(ab, dS, dA))


def partial_trace_system(ab, dS: int, dA: int) -> np.ndarray:
    """Tr_S of an operator on system (x) ancilla."""
    return np.einsum("iaib->ab", _split(ab, dS, dA))


def herm_eig(a) -> SpectralDecomposition:
    """Ascending eigendecomposition of a Hermitian matrix.

    Raises NumericalError when LAPACK fails or the reconstruction check does
    not hold, rather than handing back a bad basis.
    """
    m = as_hermitian(a)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    dec = SpectralDecomposition(w, v)
    norm = fro(m)
    d = m.shape[0]
    if fro(m - dec.reconstruct()) > 1e-10 * max(norm, 1e-300) and norm > 0:
        raise NumericalError("eigendecomposition does not reconstruct the input")
    if fro(v.conj().T @ v - np.eye(d)) > 1e-10:
        raise NumericalError("eigenvectors are not orthonormal")
    return dec


def unitary_from_hamiltonian(h, t: float) -> np.ndarray:
    """exp(-i t h) through the spectral decomposition of h."""
    w, v = herm_eig(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def evolve_unitary(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def _clamped_eigvals(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    w = np.clip(w, 0.0, 1.0)
    w[w < ZERO_EIG] = 0.0
    return w


def _xlogx(w: np.ndarray) -> float:
    nz = w[w > 0]
    return float(np.sum(nz * np.log(nz)))


def vn_entropy(rho) -> float:
    """Von Neumann entropy in nats, with 0 ln 0 = 0."""
    return max(0.0, -_xlogx(_clamped_eigvals(rho)))


def rel_entropy(a, b) -> float:
    """Relative entropy D(a||b) = Tr a ln a - Tr a ln b in nats.

    Returns ``math.inf`` when ``a`` has weight above 1e-10 on the numerical
    null space of ``b``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"rel_entropy: shapes {a.shape} and {b.shape} differ")
    wb, vb = np.linalg.eigh(hermitize(b))
    wb = np.clip(wb, 0.0, 1.0)
    # weights[j] = <b_j| a |b_j>
    weights = np.einsum("ij,ik,kj->j", vb.conj(), hermitize(a), vb).real
    null = wb < NULL_EIG
    if np.sum(np.clip(weights[null], 0.0, None)) > NULL_WEIGHT:
        return math.inf
    keep = wb > ZERO_EIG
    cross = float(np.sum(weights[keep] * np.log(wb[keep])))
    return _xlogx(_clamped_eigvals(a)) - cross


def trace_distance(a, b) -> float:
    """(1/2) sum |eigenvalues of a - b|."""
    diff = hermitize(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex))
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def gibbs(h, beta: float) -> np.ndarray:
    """Thermal state exp(-beta h)/Z; beta = inf gives :func:`ground_state`."""
    if beta is None or math.isnan(beta) or beta < 0:
        raise ValidationError(f"inverse temperature must be >= 0, got {beta!r}")
    if math.isinf(beta):
        return ground_state(h)
    w, v = herm_eig(h)
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    return hermitize((v * p) @ v.conj().T)


def ground_state(h, degeneracy_tol: float = 1e-10) -> np.ndarray:
    """Equal mixture over the lowest eigenspace of h (the beta -> inf Gibbs state)."""
    w, v = herm_eig(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    sel = w <= w[0] + degeneracy_tol * scale
    p = sel / sel.sum()
    return hermitize((v * p) @ v.conj().T)


def populations(rho, basis: np.ndarray) -> np.ndarray:
    """Diagonal of rho in the given orthonormal column basis."""
    return np.einsum("ij,ik,kj->j", basis.conj(), rho, basis).real


def parse_matrix(literal: Sequence) -> np.ndarray:
    """Read a row-major nested list whose entries are ``[re, im]`` pairs or reals."""
    try:
        rows = []
        for row in literal:
            vals = []
            for x in row:
                if isinstance(x, (list, tuple)):
                    if len(x) != 2:
                        raise ValueError(f"complex entry must be [re, im], got {x!r}")
                    vals.append(complex(float(x[0]), float(x[1])))
                else:
                    vals.append(complex(float(x)))
            rows.append(vals)
        m = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad matrix literal: {exc}") from exc
    return as_operator(m, "matrix literal")


def dump_matrix(a) -> list:
    """Inverse of :func:`parse_matrix`."""
    m = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]
