import numpy as np
import pytest

from pptswap.linops import (
    hermitian_eig,
    kron,
    partial_trace,
    partial_transpose,
    read_matrix,
    trace_distance,
    trace_norm,
    write_matrix,
)
from pptswap.states import xi_state
from pptswap.channels import swap_operator

I2 = np.eye(2)
BELL = np.zeros((4, 4), dtype=complex)
BELL[np.ix_([0, 3], [0, 3])] = 0.5  # |Phi+><Phi+|


def test_kron_identities():
    assert np.array_equal(kron(I2, I2), np.eye(4))
    assert np.array_equal(kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])),
                          np.diag([3.0, 4.0, 6.0, 8.0]))
    ket0 = np.array([[1.0], [0.0]])
    ket1 = np.array([[0.0], [1.0]])
    ket01 = kron(ket0, ket1)
    assert np.array_equal(ket01.ravel(), [0.0, 1.0, 0.0, 0.0])


def test_kron_associative_on_integer_matrices():
    rng = np.random.default_rng(7)
    a, b, c = (rng.integers(-3, 4, size=(2, 2)).astype(complex) for _ in range(3))
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_partial_trace_bell_marginal():
    assert np.allclose(partial_trace(BELL, (2, 2), keep=[0]), I2 / 2, atol=1e-12)


def test_partial_trace_xi_marginals():
    x, y = 0.6, 0.3
    xi = xi_state(x, y).matrix
    want_a = np.diag([1 - x * (1 - y), x * (1 - y)])
    want_b = np.diag([x * y, 1 - x * y])
    assert np.allclose(partial_trace(xi, (2, 2), keep=[0]), want_a, atol=1e-12)
    assert np.allclose(partial_trace(xi, (2, 2), keep=[1]), want_b, atol=1e-12)


def test_partial_trace_of_product_factorizes():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    got = partial_trace(kron(a, b), (2, 2), keep=[0])
    assert np.allclose(got, a * np.trace(b), atol=1e-12)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    red = partial_trace(m, (2, 2, 2, 2), keep=[0, 2])
    assert red.shape == (4, 4)
    assert np.isclose(np.trace(red), np.trace(m), atol=1e-12)


def test_partial_transpose_product_and_involution():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert np.allclose(partial_transpose(kron(a, b), (2, 2), [0]),
                       kron(a.T, b), atol=1e-12)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.array_equal(partial_transpose(partial_transpose(m, (2, 2), [1]),
                                            (2, 2), [1]), m)


def test_partial_transpose_bell_minimum_eigenvalue():
    w = np.linalg.eigvalsh(partial_transpose(BELL, (2, 2), [0]))
    assert abs(w.min() - (-0.5)) < 1e-12


def test_partial_transpose_preserves_hermiticity_and_trace():
    rng = np.random.default_rng(13)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = g + g.conj().T
    pt = partial_transpose(h, (2, 2), [1])
    assert np.allclose(pt, pt.conj().T, atol=1e-12)
    assert np.isclose(np.trace(pt), np.trace(h), atol=1e-12)


def test_hermitian_eig_known_spectra():
    w, _ = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0, 1.0], atol=1e-12)
    pauli_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    w, _ = hermitian_eig(pauli_x)
    assert np.allclose(w, [1.0, -1.0], atol=1e-12)


def test_hermitian_eig_reconstruction():
    rng = np.random.default_rng(17)
    g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    h = g + g.conj().T
    w, u = hermitian_eig(h)
    assert np.all(np.diff(w) <= 1e-12)
    assert abs(w.sum() - np.trace(h).real) < 1e-10
    assert np.abs((u * w) @ u.conj().T - h).max() < 1e-9
    assert np.abs(u @ u.conj().T - np.eye(8)).max() < 1e-9


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_trace_norm_values():
    assert abs(trace_norm(xi_state(0.4, 0.7).matrix) - 1.0) < 1e-12
    assert abs(trace_norm(np.diag([1.0, -1.0])) - 2.0) < 1e-12
    # xi - V xi V = (1-x)(|01><01| - |10><10|), eigenvalues +-(1-x)
    x = 0.7
    xi = xi_state(x, 0.3).matrix
    v = swap_operator()
    assert abs(trace_norm(xi - v @ xi @ v) - 0.6) < 1e-12


def test_trace_distance_values():
    rho = xi_state(0.9, 0.2).matrix
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) - 1.0) < 1e-12
    v = swap_operator()
    assert abs(trace_distance(rho, v @ rho @ v) - 0.1) < 1e-12


def test_trace_distance_triangle_inequality():
    rng = np.random.default_rng(23)
    for _ in range(20):
        mats = []
        for _ in range(3):
            g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            mats.append(g + g.conj().T)
        a, b, c = mats
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10


def test_matrix_file_round_trip(tmp_path):
    rng = np.random.default_rng(29)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    path = tmp_path / "m.txt"
    write_matrix(str(path), m)
    assert np.array_equal(read_matrix(str(path)), m)


def test_matrix_file_comments_and_errors(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("# comment\n2\n1,0 0,0\n0,0 1,0\n", encoding="utf-8")
    assert np.array_equal(read_matrix(str(path)), np.eye(2))
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n1 0\n0 1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_matrix(str(bad))
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 3), keep=[0])
