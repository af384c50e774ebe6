"""Model Hamiltonians, couplings and Pauli building blocks.

Qubit basis convention: sigma^z |0> = |0>, sigma^z |1> = -|1>, so |0> is the
excited level of (h/2) sigma^z.  Registers are ordered left to right; the
two-qubit battery composite is (battery qubit 1, battery qubit 2, ancilla).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .operators import as_hermitian, commutator, fro

_SINGLE = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}

VARIANTS = ("single_qubit", "two_qubit", "custom")


@dataclass(frozen=True)
class PauliLabel:
    axis: str
    site: int = 0


def pauli(label: PauliLabel | str, register_size: int = 1, site: Optional[int] = None) -> np.ndarray:
    """Pauli-type operator on one site of a qubit register, identity elsewhere.

    ``pauli("z")`` and ``pauli(PauliLabel("z", 0), 1)`` are equivalent.
    sigma^{+/-} = (sigma^x +/- i sigma^y) / 2.
    """
    if isinstance(label, str):
        label = PauliLabel(label, 0 if site is None else site)
    if label.axis not in _SINGLE or label.axis == "i":
        raise ValueError(f"unknown Pauli axis {label.axis!r}")
    if register_size < 1 or not 0 <= label.site < register_size:
        raise IndexError(f"site {label.site} out of range for register of size {register_size}")
    out = np.ones((1, 1), dtype=complex)
    for k in range(register_size):
        out = np.kron(out, _SINGLE[label.axis] if k == label.site else _SINGLE["i"])
    return out


def _p(axis: str, site: int, n: int) -> np.ndarray:
    return pauli(PauliLabel(axis, site), n)


def build_single_qubit(h: float, a: float):
    """Single-qubit battery charged into omega_beta(-H_S).

    Returns ``(H_S, H_A, V)`` with H_S = H_A = (h/2) sigma^z and
    V = a (s+ s+ + s- s-) on the 4-dim composite.
    """
    if not h > 0:
        raise ValidationError(f"single-qubit battery needs h > 0, got {h!r}")
    hs = 0.5 * h * _SINGLE["z"]
    V = a * (_p("plus", 0, 2) @ _p("plus", 1, 2) + _p("minus", 0, 2) @ _p("minus", 1, 2))
    return hs, hs.copy(), V


def build_thermalizing_single_qubit(h: float, a: float):
    """Excitation-exchange variant V = a (s+ s- + s- s+); relaxes to omega_beta(H_S)."""
    if not h > 0:
        raise ValidationError(f"single-qubit battery needs h > 0, got {h!r}")
    hs = 0.5 * h * _SINGLE["z"]
    V = a * (_p("plus", 0, 2) @ _p("minus", 1, 2) + _p("minus", 0, 2) @ _p("plus", 1, 2))
    return hs, hs.copy(), V


def build_xx_single_qubit(h: float, a: float):
    """V = a sigma^x (x) sigma^x with H_S = H_A = (h/2) sigma^z: a map without equilibrium."""
    if not h > 0:
        raise ValidationError(f"single-qubit battery needs h > 0, got {h!r}")
    hs = 0.5 * h * _SINGLE["z"]
    return hs, hs.copy(), a * np.kron(_SINGLE["x"], _SINGLE["x"])


def two_qubit_battery(h: float, J: float) -> np.ndarray:
    """H_S = (h/2)(z1 + z2) + J (x1 x2 + y1 y2)."""
    return 0.5 * h * (_p("z", 0, 2) + _p("z", 1, 2)) + J * (
        _p("x", 0, 2) @ _p("x", 1, 2) + _p("y", 0, 2) @ _p("y", 1, 2)
    )


def two_qubit_H0(h: float) -> np.ndarray:
    """Equilibrium operator (h/2)(z1 + z2) of the two-qubit battery."""
    return 0.5 * h * (_p("z", 0, 2) + _p("z", 1, 2))


def build_two_qubit(h: float, J: float):
    """Two-qubit battery coupled through qubit 1 to a (h/2) sigma^z ancilla.

    Requires 2J > h > 0 so the H_S levels are ordered as
    (-2J, -h, h, 2J).
    """
    if not (2 * J > h > 0):
        raise ValidationError(f"two-qubit battery needs 2J > h > 0, got h={h!r}, J={J!r}")
    hs = two_qubit_battery(h, J)
    ha = 0.5 * h * _SINGLE["z"]
    V = _p("x", 2, 3) @ _p("x", 0, 3) + _p("y", 2, 3) @ _p("y", 0, 3)
    return hs, ha, V


def ladder_residual(H: np.ndarray, S: np.ndarray, lam: float) -> float:
    """||[H, S] - lam S||_F."""
    return fro(commutator(H, S) - lam * S)


def build_inversion_protocol(H, ladder_ops: Sequence, a: float = 1.0, tol: float = 1e-10):
    """Coupling to ancilla copies of the system whose equilibrium operator is -H.

    ``ladder_ops`` is a list of ``(S, lam)`` with [H, S] = lam S.  The ancilla
    uses the same Hamiltonian and the same ladder operators, and the coupling
    is V = a sum_k (S_k (x) S_k + h.c.), which commutes with -H (x) 1 + 1 (x) H.
    """
    H = as_hermitian(H, "H")
    d = H.shape[0]
    V = np.zeros((d * d, d * d), dtype=complex)
    for k, (S, lam) in enumerate(ladder_ops):
        S = np.asarray(S, dtype=complex)
        if S.shape != H.shape:
            raise ValidationError(f"ladder operator {k} has shape {S.shape}, expected {H.shape}")
        res = ladder_residual(H, S, lam)
        if res > tol * (1.0 + fro(S)):
            raise ValidationError(
                f"ladder operator {k} violates [H, S] = lam S (residual {res:.3e})"
            )
        term = np.kron(S, S)
        V += a * (term + term.conj().T)
    return H, H.copy(), V


@dataclass
class ModelSpec:
    """Parameters of one of the named models, or explicit matrices for ``custom``."""

    variant: str
    h: float = 0.0
    J: float = 0.0
    a: float = 0.0
    H_S: Optional[np.ndarray] = None
    H_A: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    degenerate: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown model variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == "single_qubit" and not self.h > 0:
            raise ValidationError(f"single_qubit needs h > 0, got {self.h!r}")
        if self.variant == "two_qubit" and not (2 * self.J > self.h > 0):
            raise ValidationError(f"two_qubit needs 2J > h > 0, got h={self.h!r}, J={self.J!r}")
        if self.variant == "custom" and (self.H_S is None or self.H_A is None or self.V is None):
            raise ValidationError("custom model needs H_S, H_A and V")
        hs = self.build()[0]
        w = np.linalg.eigvalsh(hs)
        self.degenerate = bool(np.any(np.diff(w) < 1e-10 * max(1.0, np.max(np.abs(w)))))

    def build(self):
        """Return ``(H_S, H_A, V)``."""
        if self.variant == "single_qubit":
            return build_single_qubit(self.h, self.a)
        if self.variant == "two_qubit":
            return build_two_qubit(self.h, self.J)
        return (
            as_hermitian(self.H_S, "H_S"),
            as_hermitian(self.H_A, "H_A"),
            as_hermitian(self.V, "V"),
        )
