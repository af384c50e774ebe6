import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbatt.collision import CollisionModel, evolve
from qbatt.errors import DimensionError, ValidationError
from qbatt.ergotropy import (
    charging_report,
    ergotropy,
    ergotropy_bound,
    haar_unitaries,
    narrow_band_H0,
    narrow_band_scan,
    random_unitary_dominance,
    shared_eigenbasis,
)
from qbatt.hamiltonians import build_two_qubit, pauli, two_qubit_battery, two_qubit_H0
from qbatt.operators import gibbs, vn_entropy

from conftest import rand_density, rand_herm, rand_unitary


def brute_ergotropy(rho, H):
    """Oracle: best permutation of rho's eigenvalues onto H's eigenvectors."""
    r = np.linalg.eigvalsh(rho)
    E = np.linalg.eigvalsh(H)
    e = np.trace(H @ rho).real
    return e - min(float(np.dot(perm, E)) for perm in itertools.permutations(r))


def two_qubit_closed(h, J, beta):
    f = math.sinh(beta * h) / (1 + math.cosh(beta * h))
    return (2 * J - h) * f, 2 * J * f, -h * f


def test_ergotropy_examples():
    H = 0.75 * pauli("z")
    assert ergotropy(gibbs(H, 1.0), H).value == pytest.approx(0, abs=1e-15)
    assert ergotropy(np.diag([1.0, 0.0]), H).value == pytest.approx(1.5, abs=1e-15)
    assert ergotropy(gibbs(-H, 1.0), H).value == pytest.approx(1.5 * math.tanh(0.75), abs=1e-14)
    assert ergotropy(np.eye(2) / 2, H).value == pytest.approx(0, abs=1e-15)
    J = 1.0
    hs = two_qubit_battery(0.5, J)
    e4 = np.array([0, 1, 1, 0]) / math.sqrt(2)
    assert ergotropy(np.outer(e4, e4), hs).value == pytest.approx(4 * J, abs=1e-13)
    with pytest.raises(DimensionError):
        ergotropy(np.eye(2) / 2, np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_ergotropy_invariants(d, seed):
    r = np.random.default_rng(seed)
    rho, H = rand_density(r, d), rand_herm(r, d)
    rep = ergotropy(rho, H)
    assert rep.value >= -1e-12
    assert rep.value == pytest.approx(brute_ergotropy(rho, H), abs=1e-10)
    # the passive state is passive and unitarily related to rho
    assert ergotropy(rep.passive_state, H).value <= 1e-10
    u = rep.optimal_unitary
    np.testing.assert_allclose(u @ rho @ u.conj().T, rep.passive_state, atol=1e-10)
    # invariant under relabelling by a common unitary
    w = rand_unitary(r, d)
    assert ergotropy(w @ rho @ w.conj().T, w @ H @ w.conj().T).value == pytest.approx(rep.value, abs=1e-10)
    assert rep.value <= rep.bound + 1e-10


def test_bound_examples():
    h = 1.5
    H = 0.5 * h * pauli("z")
    bound, bstar = ergotropy_bound(np.diag([1.0, 0.0]), H)
    assert bstar == math.inf and bound == pytest.approx(h, abs=1e-15)
    bound, bstar = ergotropy_bound(np.eye(2) / 2, H)
    assert bstar == 0.0 and bound == pytest.approx(0, abs=1e-15)
    # population inversion of a Gibbs state sits at beta* = beta and saturates the bound
    rep = ergotropy(gibbs(-H, 1.0), H)
    assert rep.beta_star == pytest.approx(1.0, abs=1e-12)
    assert rep.bound == pytest.approx(rep.value, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_bound_matches_entropy(d, seed):
    r = np.random.default_rng(seed)
    rho, H = rand_density(r, d), rand_herm(r, d)
    bound, bstar = ergotropy_bound(rho, H)
    if math.isfinite(bstar):
        assert vn_entropy(gibbs(H, bstar)) == pytest.approx(vn_entropy(rho), abs=1e-9)
    assert ergotropy(rho, H).value <= bound + 1e-10


def test_charging_single_qubit():
    for h, beta in [(1.5, 1.0), (0.3, 4.0), (2.0, 0.1)]:
        H = 0.5 * h * pauli("z")
        rep = charging_report(H, -H, beta)
        w = h * math.tanh(beta * h / 2)
        assert rep.ergotropy == pytest.approx(w, abs=1e-12)
        assert rep.W_R == pytest.approx(2 * w, abs=1e-12)
        assert rep.Q_R == pytest.approx(-w, abs=1e-12)
        assert rep.eta == pytest.approx(0.5, abs=1e-12)
        assert rep.permutation == (1, 0)


def test_charging_two_qubit():
    h, J, beta = 0.5, 1.0, 2.0
    rep = charging_report(two_qubit_battery(h, J), two_qubit_H0(h), beta)
    erg, wr, qr = two_qubit_closed(h, J, beta)
    assert rep.ergotropy == pytest.approx(erg, abs=1e-12)
    assert rep.ergotropy == pytest.approx(0.6931757358900145, abs=1e-12)
    assert rep.W_R == pytest.approx(wr, abs=1e-12)
    assert rep.Q_R == pytest.approx(qr, abs=1e-12)
    assert rep.eta == pytest.approx(1 - h / (2 * J), abs=1e-12)
    assert rep.permutation == (1, 0, 3, 2)
    np.testing.assert_allclose(rep.energies, [-2 * J, -h, h, 2 * J], atol=1e-13)


def test_charging_low_temperature_limit():
    h, J = 0.05, 1.0
    rep = charging_report(two_qubit_battery(h, J), two_qubit_H0(h), 200.0)
    assert abs(rep.ergotropy - (2 * J - h)) <= 0.01 * (2 * J - h)


def test_charging_nothing_to_do():
    H = np.diag([0.0, 1.0, 2.0])
    rep = charging_report(H, H, 1.0)
    assert rep.eta is None
    assert rep.ergotropy == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValidationError):
        charging_report(H, H, 0.0)


def test_charging_rejects_noncommuting():
    with pytest.raises(ValidationError):
        charging_report(pauli("z"), pauli("x"), 1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.floats(0.05, 5.0), st.integers(0, 2**32 - 1))
def test_charging_invariants(d, beta, seed):
    r = np.random.default_rng(seed)
    E = np.sort(r.normal(size=d))
    E0 = r.normal(size=d)
    u = rand_unitary(r, d)
    H_S, H0 = (u * E) @ u.conj().T, (u * E0) @ u.conj().T
    rep = charging_report(H_S, H0, beta)
    assert rep.Q_R <= 1e-12
    assert rep.W_R == pytest.approx(rep.ergotropy - rep.Q_R, abs=1e-11)
    assert rep.ergotropy >= -1e-12
    assert rep.ergotropy == pytest.approx(ergotropy(rep.pi, H_S).value, abs=1e-10)
    if rep.eta is not None:
        assert rep.eta <= 1 + 1e-12
    np.testing.assert_allclose(rep.pi, gibbs(H0, beta), atol=1e-12)
    assert ergotropy(rep.passive_state, H_S).value <= 1e-10


def test_shared_eigenbasis_degenerate():
    hs = np.diag([0.0, 1.0, 1.0]).astype(complex)
    u = np.eye(3, dtype=complex)
    u[1:, 1:] = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    H0 = u @ np.diag([2.0, 5.0, -1.0]) @ u.conj().T
    E, E0, v = shared_eigenbasis(hs, H0)
    np.testing.assert_allclose(E, [0, 1, 1], atol=1e-13)
    np.testing.assert_allclose(sorted(E0), [-1, 2, 5], atol=1e-13)
    np.testing.assert_allclose(v.conj().T @ H0 @ v, np.diag(E0), atol=1e-12)
    np.testing.assert_allclose(v.conj().T @ hs @ v, np.diag(E), atol=1e-12)


def test_recharging_matches_collision_totals():
    # evolving sigma_pi under the equilibrium map spends W_R and exchanges Q_R
    h, J, beta = 0.5, 1.0, 2.0
    m = CollisionModel(*build_two_qubit(h, J), beta=beta, tau=0.3)
    rep = charging_report(m.H_S, two_qubit_H0(h), beta)
    traj = evolve(m, rep.passive_state, conv_tol=1e-13)
    assert traj.converged
    assert traj.W == pytest.approx(rep.W_R, abs=1e-9)
    assert traj.Q == pytest.approx(rep.Q_R, abs=1e-9)


def test_narrow_band_scan():
    H_S = np.diag([0.0, 1.0, 2.0, 3.0])
    offsets = [1, 1 / 3, -1 / 3, -1]
    scan = narrow_band_scan(H_S, 1.0, offsets, np.logspace(-1, -3, 9), 1.0)
    assert scan.ergotropy_slope == pytest.approx(1.0, abs=0.05)
    assert scan.heat_slope == pytest.approx(2.0, abs=0.05)
    etas = [row[4] for row in scan.rows]
    # epsilon decreases along the rows, so eta increases toward 1
    assert all(b >= a - 1e-12 for a, b in zip(etas, etas[1:]))
    assert etas[-1] > 0.99


def test_narrow_band_aligned_offsets():
    H_S = np.diag([0.0, 1.0, 2.0])
    rep = charging_report(H_S, narrow_band_H0(H_S, 1.0, [-1, 0, 1], 0.01), 1.0)
    assert rep.ergotropy == pytest.approx(0, abs=1e-15)
    with pytest.raises(DimensionError):
        narrow_band_H0(H_S, 1.0, [0, 1], 0.1)
    with pytest.raises(ValidationError):
        narrow_band_H0(H_S, 1.0, [0, 1, 2], 0.1)


def test_haar_unitaries_are_unitary():
    u = haar_unitaries(3, 200, np.random.default_rng(3))
    eye = np.eye(3)
    assert np.max(np.abs(u @ np.conj(np.swapaxes(u, 1, 2)) - eye)) < 1e-12
    # first moment of a Haar ensemble vanishes
    assert np.abs(haar_unitaries(3, 20000, np.random.default_rng(4)).mean(axis=0)).max() < 0.03


def test_dominance():
    H = 0.75 * pauli("z")
    pi = gibbs(-H, 1.0)
    erg = ergotropy(pi, H).value
    best = random_unitary_dominance(pi, H, 10000, seed=0)
    assert best <= erg + 1e-12
    assert best >= 0.95 * erg
    assert random_unitary_dominance(pi, H, 10000, seed=0) == best
    with pytest.raises(ValueError):
        random_unitary_dominance(pi, H, 0, seed=0)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_dominance_random(d, seed):
    r = np.random.default_rng(seed)
    rho, H = rand_density(r, d), rand_herm(r, d)
    assert random_unitary_dominance(rho, H, 500, seed) <= ergotropy(rho, H).value + 1e-12
