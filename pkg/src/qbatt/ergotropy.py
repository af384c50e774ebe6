"""Ergotropy, passive states and the economics of recharging an equilibrium battery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import unitary_group

from .errors import DimensionError, NumericalError, ValidationError
from .operators import as_density, as_hermitian, commutator, fro, herm_eig, vn_entropy

BETA_SCALE_CAP = 1e6


@dataclass(eq=False)
class ErgotropyReport:
    value: float
    passive_state: np.ndarray
    passive_populations: np.ndarray
    optimal_unitary: np.ndarray
    bound: float
    beta_star: float


def _passive(rho: np.ndarray, H: np.ndarray):
    r, vr = np.linalg.eigh(rho)
    r, vr = r[::-1], vr[:, ::-1]
    E, vE = herm_eig(H)
    return r, vr, E, vE


def ergotropy(rho, H) -> ErgotropyReport:
    """Maximal work extractable from ``rho`` by a cyclic unitary, with its passive state.

    The value is computed twice, from the eigenvector overlaps and as
    Tr[H (rho - sigma)], and the two must agree to 1e-11.
    """
    rho = as_density(rho)
    H = as_hermitian(H, "H")
    if rho.shape != H.shape:
        raise DimensionError(f"state {rho.shape} and Hamiltonian {H.shape} differ in dimension")
    r, vr, E, vE = _passive(rho, H)
    overlap = np.abs(vr.conj().T @ vE) ** 2
    w_overlap = float(r @ overlap @ E - r @ E)
    sigma = (vE * r) @ vE.conj().T
    w_trace = float(np.trace(H @ (rho - sigma)).real)
    if abs(w_overlap - w_trace) > 1e-11 * (1.0 + float(np.max(np.abs(E)))):
        raise NumericalError(f"ergotropy evaluations disagree: {w_overlap!r} vs {w_trace!r}")
    bound, beta_star = ergotropy_bound(rho, H)
    return ErgotropyReport(
        value=w_trace,
        passive_state=(sigma + sigma.conj().T) / 2,
        passive_populations=np.clip(r, 0.0, 1.0),
        optimal_unitary=vE @ vr.conj().T,
        bound=bound,
        beta_star=beta_star,
    )


def ergotropy_bound(rho, H):
    """Thermal upper bound Tr[H (rho - omega_beta*(H))] with S(omega_beta*) = S(rho).

    Returns ``(bound, beta_star)``; beta_star is ``math.inf`` when the entropy
    is too small to be matched at any finite temperature.
    """
    rho = np.asarray(rho, dtype=complex)
    H = as_hermitian(H, "H")
    d = H.shape[0]
    E = np.linalg.eigvalsh(H)
    s_target = vn_entropy(rho)
    if s_target > math.log(d) + 1e-12:
        raise ValidationError(f"entropy {s_target!r} exceeds ln d = {math.log(d)!r}")
    energy = float(np.trace(H @ rho).real)
    spread = float(E[-1] - E[0])
    scale = max(1.0, float(np.max(np.abs(E))))
    g = int(np.sum(E <= E[0] + 1e-10 * scale))

    def s_of(beta):
        p = np.exp(-beta * (E - E[0]))
        p /= p.sum()
        nz = p[p > 0]
        return float(-np.sum(nz * np.log(nz)))

    if s_target <= 1e-12 or spread <= 1e-14 * scale or s_target <= math.log(g) + 1e-12:
        beta_star = math.inf
        return energy - float(E[0]), beta_star
    if s_target >= math.log(d) - 1e-15:
        return energy - float(np.mean(E)), 0.0

    hi = 1.0 / spread
    while s_of(hi) > s_target:
        hi *= 2.0
        if hi * spread > BETA_SCALE_CAP:
            return energy - float(E[0]), math.inf
    beta_star = brentq(lambda b: s_of(b) - s_target, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    p = np.exp(-beta_star * (E - E[0]))
    p /= p.sum()
    return energy - float(p @ E), float(beta_star)


@dataclass(eq=False)
class ChargingReport:
    """Recharging sigma_pi -> pi for pi = omega_beta(H0); permutation indices are 0-based."""

    ergotropy: float
    W_R: float
    Q_R: float
    eta: Optional[float]
    permutation: tuple
    energies: np.ndarray
    energies0: np.ndarray
    populations: np.ndarray
    passive_populations: np.ndarray
    basis: np.ndarray

    @property
    def pi(self) -> np.ndarray:
        return (self.basis * self.populations) @ self.basis.conj().T

    @property
    def passive_state(self) -> np.ndarray:
        return (self.basis * self.passive_populations) @ self.basis.conj().T


def shared_eigenbasis(H_S, H0, tol: float = 1e-10):
    """Common eigenbasis of commuting H_S and H0, ordered by ascending H_S energy.

    Inside degenerate H_S eigenspaces H0 is diagonalized blockwise.  Returns
    ``(E, E0, basis)``.
    """
    H_S = as_hermitian(H_S, "H_S")
    H0 = as_hermitian(H0, "H0")
    res = fro(commutator(H0, H_S))
    if res > tol * (1.0 + fro(H0) * fro(H_S)):
        raise ValidationError(f"[H0, H_S] != 0 (residual {res:.3e})")
    E, v = herm_eig(H_S)
    scale = max(1.0, float(np.max(np.abs(E))))
    start = 0
    for k in range(1, len(E) + 1):
        if k == len(E) or E[k] - E[k - 1] > tol * scale:
            if k - start > 1:
                vb = v[:, start:k]
                _, c = np.linalg.eigh(vb.conj().T @ H0 @ vb)
                v[:, start:k] = vb @ c
            start = k
    E0 = np.einsum("ij,ik,kj->j", v.conj(), H0, v).real
    return E, E0, v


def charging_report(H_S, H0, beta: float) -> ChargingReport:
    """Ergotropy of omega_beta(H0) and the work/heat to recharge it from its passive state.

    The permutation p orders the H0 levels ascending (ties keep ascending H_S
    order), sigma_pi puts population pop[p_i] on |E_i>, and
    Q_R = Tr[H0 (pi - sigma)], W_R = Tr[(H_S - H0)(pi - sigma)],
    eta = ergotropy / W_R (None when there is nothing to charge).
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise ValidationError(f"beta must be finite and positive, got {beta!r}")
    E, E0, basis = shared_eigenbasis(H_S, H0)
    weights = np.exp(-beta * (E0 - E0.min()))
    pop = weights / weights.sum()
    p = np.argsort(E0, kind="stable")
    passive_pop = pop[p]
    diff = pop - passive_pop
    Q_R = float(E0 @ diff)
    W_R = float((E - E0) @ diff)
    erg = float((E[p] - E) @ passive_pop)
    scale = 1.0 + float(np.max(np.abs(E))) + float(np.max(np.abs(E0)))
    if abs(W_R - (erg - Q_R)) > 1e-11 * scale:
        raise NumericalError("W_R != ergotropy - Q_R")
    if W_R <= 1e-14 and erg <= 1e-14:
        eta = None
    else:
        eta = erg / W_R
    return ChargingReport(
        ergotropy=erg,
        W_R=W_R,
        Q_R=Q_R,
        eta=eta,
        permutation=tuple(int(i) for i in p),
        energies=E,
        energies0=E0,
        populations=pop,
        passive_populations=passive_pop,
        basis=basis,
    )


@dataclass
class NarrowBandScan:
    rows: List[tuple]  # (epsilon, ergotropy, W_R, Q_R, eta)
    ergotropy_slope: float
    heat_slope: float


def narrow_band_H0(H_S, center: float, offsets: Sequence[float], epsilon: float) -> np.ndarray:
    """H0 = sum_i (center + x_i epsilon) |E_i><E_i| on the ascending H_S eigenbasis."""
    E, v = herm_eig(H_S)
    x = np.asarray(offsets, dtype=float)
    if x.shape != E.shape:
        raise DimensionError(f"need {len(E)} offsets, got {x.size}")
    if np.any(np.abs(x) > 1):
        raise ValidationError("offsets must lie in [-1, 1]")
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon!r}")
    return (v * (center + x * epsilon)) @ v.conj().T


def narrow_band_scan(H_S, center: float, offsets: Sequence[float], epsilons: Sequence[float], beta: float) -> NarrowBandScan:
    """Charging economics of narrow-band H0 and log-log slopes of ergotropy and |Q_R| in epsilon."""
    rows = []
    for eps in epsilons:
        rep = charging_report(H_S, narrow_band_H0(H_S, center, offsets, eps), beta)
        rows.append((float(eps), rep.ergotropy, rep.W_R, rep.Q_R, rep.eta))
    slopes = [math.nan, math.nan]
    if len(rows) >= 2:
        le = np.log([r[0] for r in rows])
        for k, col in enumerate((1, 3)):
            y = np.array([abs(r[col]) for r in rows])
            if np.all(y > 0):
                slopes[k] = float(np.polyfit(le, np.log(y), 1)[0])
    return NarrowBandScan(rows, slopes[0], slopes[1])


def haar_unitaries(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-distributed d x d unitaries, shape (n, d, d)."""
    return unitary_group.rvs(d, size=n, random_state=rng).reshape(n, d, d)


def random_unitary_dominance(rho, H, trials: int, seed: int, batch: int = 4096) -> float:
    """Largest Tr[H (rho - u rho u^dag)] over ``trials`` seeded Haar unitaries."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    rng = np.random.default_rng(seed)
    e0 = float(np.trace(H @ rho).real)
    best = -math.inf
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        u = haar_unitaries(H.shape[0], n, rng)
        rotated = u @ rho @ np.conj(np.swapaxes(u, 1, 2))
        e = np.einsum("ij,nji->n", H, rotated).real
        best = max(best, e0 - float(e.min()))
        done += n
    return best
