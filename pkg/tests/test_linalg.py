import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psbounds import linalg as la

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
PPLUS = np.full((2, 2), 0.5, dtype=complex)
PHI = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def random_herm(seed, n):
    r = np.random.default_rng(seed)
    A = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    return (A + A.conj().T) / 2


def test_kron_examples():
    assert np.allclose(la.kron(np.eye(2), np.eye(2)), np.eye(4))
    out = la.kron(P0, np.diag([0.0, 1.0]))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.allclose(out, expected)
    assert np.allclose(la.kron(Z, Z), np.diag([1, -1, -1, 1]))


def test_partial_trace_examples():
    bell = la.projector(PHI)
    assert np.allclose(la.partial_trace(bell, (2, 2), [1]), np.eye(2) / 2)
    rho = np.diag([0.7, 0.3]).astype(complex)
    tau = np.array([[0.5, 0.2j], [-0.2j, 0.5]])
    assert np.allclose(la.partial_trace(la.kron(rho, tau), (2, 2), [0]), rho)
    steered = la.partial_trace(la.kron(Z.T, np.eye(2)) @ bell, (2, 2), [1])
    assert np.allclose(steered, Z / 2)


def test_partial_trace_dimension_error():
    with pytest.raises(la.DimensionError):
        la.partial_trace(np.eye(4), (2, 3), [0])


@given(st.integers(0, 10_000), st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]))
def test_partial_trace_preserves_trace(seed, dims):
    n = int(np.prod(dims))
    M = random_herm(seed, n)
    for k in range(len(dims)):
        assert np.isclose(np.trace(la.partial_trace(M, dims, [k])), np.trace(M))


def test_eig_herm_examples():
    w, _ = la.eig_herm(np.diag([1.0, 3.0]))
    assert np.allclose(w, [3, 1])
    w, V = la.eig_herm(X)
    assert np.allclose(w, [1, -1])
    assert np.isclose(abs(V[:, 0].conj() @ np.array([1, 1]) / np.sqrt(2)), 1)
    assert np.isclose(la.eig_herm(P0 + PPLUS)[0][0], 1 + 1 / np.sqrt(2))


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_eig_herm_reconstruction(seed, n):
    M = random_herm(seed, n)
    w, V = la.eig_herm(M)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - M)) <= 1e-10


def test_eig_herm_rejects_non_hermitian():
    with pytest.raises(la.NotHermitianError):
        la.eig_herm(np.array([[0, 1], [0, 0]]))


def test_opnorm_and_psd():
    assert la.opnorm(np.eye(3)) == pytest.approx(1)
    assert la.opnorm(-2 * np.eye(2)) == pytest.approx(2)
    assert la.opnorm(P0 + PPLUS) == pytest.approx(1.7071067811865475)
    assert la.is_psd(np.eye(2), 1e-9)
    assert not la.is_psd(np.diag([1, -1e-6]), 1e-9)
    assert la.is_psd(np.diag([1, -1e-12]), 1e-9)


def test_hermitian_basis_orthonormal():
    for d in (2, 3):
        B = la.hermitian_basis(d)
        assert len(B) == d * d
        G = np.array([[np.trace(a @ b).real for b in B] for a in B])
        assert np.allclose(G, np.eye(d * d))
