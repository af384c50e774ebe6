import numpy as np
import pytest

from qbatt.collision import CollisionModel

ACCEPTANCE_LINES = []


def rand_herm(rng, d, scale=1.0):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (z + z.conj().T) / 2


def rand_unitary(rng, d):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_density(rng, d, rank=None):
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_equilibrium_model(rng, dS, dA, beta, tau):
    """Integer spectra for H0 and H_A; V is block diagonal in the eigenspaces of K."""
    e0 = rng.integers(-2, 3, size=dS).astype(float)
    eA = rng.integers(-2, 3, size=dA).astype(float)
    us = np.linalg.qr(rng.standard_normal((dS, dS)) + 1j * rng.standard_normal((dS, dS)))[0]
    H0 = (us * e0) @ us.conj().T
    # H_S shares the eigenbasis of H0 but has generic levels
    H_S = (us * rng.normal(size=dS)) @ us.conj().T
    H_A = np.diag(eA).astype(complex)
    Kd = np.add.outer(e0, eA).reshape(-1)
    basis = np.kron(us, np.eye(dA))
    X = rand_herm(rng, dS * dA)
    X = np.where(np.equal.outer(Kd, Kd), X, 0)
    V = basis @ X @ basis.conj().T
    return CollisionModel(H_S, H_A, V, beta, tau), H0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
