import math

import numpy as np
import pytest

from qbatt.errors import ValidationError
from qbatt.hamiltonians import (
    ModelSpec,
    PauliLabel,
    build_inversion_protocol,
    build_single_qubit,
    build_two_qubit,
    pauli,
    two_qubit_H0,
)
from qbatt.operators import commutator, herm_eig

I2 = np.eye(2)


def comm_norm(a, b):
    return np.linalg.norm(commutator(a, b))


def test_pauli_examples():
    np.testing.assert_array_equal(pauli(PauliLabel("z", 0), 1), np.diag([1, -1]))
    np.testing.assert_array_equal(pauli("plus") @ pauli("minus"), np.diag([1, 0]))
    np.testing.assert_array_equal(pauli(PauliLabel("x", 0), 2), np.kron(pauli("x"), I2))
    np.testing.assert_array_equal(pauli("plus"), (pauli("x") + 1j * pauli("y")) / 2)
    with pytest.raises(IndexError):
        pauli(PauliLabel("z", 2), 2)
    with pytest.raises(ValueError):
        pauli("w")


def test_single_qubit_structure():
    hs, ha, V = build_single_qubit(1.5, math.sqrt(10))
    zS, zA = pauli("z", 2, 0), pauli("z", 2, 1)
    assert comm_norm(zA - zS, V) == 0
    # only |00> <-> |11> matrix elements, both equal to a
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = math.sqrt(10)
    np.testing.assert_array_equal(V, expected)
    np.testing.assert_array_equal(build_single_qubit(1.0, 0.0)[2], np.zeros((4, 4)))
    HS, HA = np.kron(hs, I2), np.kron(I2, ha)
    assert comm_norm(HS + HA + V, -HS + HA) <= 1e-12
    with pytest.raises(ValidationError):
        build_single_qubit(0.0, 1.0)


def test_two_qubit_spectrum():
    h, J = 0.5, 1.0
    hs, ha, V = build_two_qubit(h, J)
    w, v = herm_eig(hs)
    np.testing.assert_allclose(w, [-2, -0.5, 0.5, 2], atol=1e-14)
    e4 = np.array([0, 1, 1, 0]) / math.sqrt(2)
    assert abs(abs(np.vdot(v[:, 3], e4)) - 1) < 1e-14
    e1 = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert abs(abs(np.vdot(v[:, 0], e1)) - 1) < 1e-14
    # |00> has energy h, |11> has -h
    assert abs(abs(v[0, 2]) - 1) < 1e-14 and abs(abs(v[3, 1]) - 1) < 1e-14
    assert V.shape == (8, 8) and ha.shape == (2, 2)


def test_two_qubit_degenerate_limit():
    from qbatt.hamiltonians import two_qubit_battery

    np.testing.assert_allclose(np.linalg.eigvalsh(two_qubit_battery(0.0, 1.0)), [-2, 0, 0, 2], atol=1e-14)


def test_two_qubit_equilibrium_conditions():
    h, J = 0.7, 0.9
    hs, ha, V = build_two_qubit(h, J)
    H0 = two_qubit_H0(h)
    assert comm_norm(H0, hs) <= 1e-12
    assert comm_norm(np.kron(H0, I2) + np.kron(np.eye(4), ha), V) <= 1e-12


def test_two_qubit_rejects_bad_order():
    for h, J in [(1.0, 0.5), (0.0, 1.0), (-0.1, 1.0)]:
        with pytest.raises(ValidationError):
            build_two_qubit(h, J)


def test_inversion_protocol_reproduces_single_qubit():
    h, a = 1.5, 2.0
    H = 0.5 * h * pauli("z")
    hs, ha, V = build_inversion_protocol(H, [(pauli("plus"), h)], a=a)
    np.testing.assert_allclose(V, build_single_qubit(h, a)[2], atol=0)
    HS, HA = np.kron(hs, I2), np.kron(I2, ha)
    assert comm_norm(V, -HS + HA) <= 1e-10


def test_inversion_protocol_empty_and_rejects(rng):
    H = np.diag([0.0, 1.0, 3.0])
    _, _, V = build_inversion_protocol(H, [])
    np.testing.assert_array_equal(V, np.zeros((9, 9)))
    with pytest.raises(ValidationError, match="residual"):
        build_inversion_protocol(H, [(np.ones((3, 3)), 1.0)])


def test_inversion_protocol_qutrit():
    H = np.diag([0.0, 1.0, 3.0]).astype(complex)
    ladders = []
    for i in range(3):
        for j in range(3):
            if H[j, j] > H[i, i]:
                S = np.zeros((3, 3), dtype=complex)
                S[j, i] = 1.0  # raises |i> -> |j>
                ladders.append((S, (H[j, j] - H[i, i]).real))
    hs, ha, V = build_inversion_protocol(H, ladders, a=0.8)
    assert np.allclose(V, V.conj().T)
    K = -np.kron(hs, np.eye(3)) + np.kron(np.eye(3), ha)
    assert comm_norm(V, K) <= 1e-10


def test_model_spec():
    m = ModelSpec("two_qubit", h=0.5, J=1.0)
    assert not m.degenerate
    assert len(m.build()) == 3
    assert ModelSpec("custom", H_S=np.eye(2), H_A=np.eye(2), V=np.zeros((4, 4))).degenerate
    with pytest.raises(ValidationError):
        ModelSpec("two_qubit", h=2.5, J=1.0)
    with pytest.raises(ValidationError):
        ModelSpec("three_qubit")
    with pytest.raises(ValidationError):
        ModelSpec("custom", H_S=np.eye(2))
