"""Dense complex-Hermitian helpers.

Everything here works on plain ``numpy`` arrays; matrices in this package
are at most 8x8, so no effort is spent on sparsity.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-9


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= tol)


def as_hermitian(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``M`` as Hermitian and return it as a complex array."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise NotHermitianError(f"matrix is not square: {A.shape}")
    if not is_hermitian(A, tol):
        err = np.max(np.abs(A - A.conj().T))
        raise NotHermitianError(f"matrix is not Hermitian (max asymmetry {err:.3e})")
    return A


def kron(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for M in mats:
        out = np.kron(out, as_matrix(M))
    return out


def partial_trace(M, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every tensor factor whose index is not in ``keep``.

    ``dims`` lists the factor dimensions in the order they appear in the
    Kronecker product; kept factors retain that order.
    """
    A = as_matrix(M)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise DimensionError(f"dimensions must be positive: {dims}")
    n = int(np.prod(dims))
    if A.shape != (n, n):
        raise DimensionError(f"matrix shape {A.shape} does not match dims {dims}")
    keep = sorted({int(k) for k in ([keep] if np.isscalar(keep) else keep)})
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} factors")

    k = len(dims)
    T = A.reshape(dims + dims)
    # trace from the highest axis down so lower axis numbers stay valid
    for ax in reversed(range(k)):
        if ax in keep:
            continue
        cur = T.ndim // 2
        T = np.trace(T, axis1=ax, axis2=ax + cur)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return T.reshape(dk, dk)


def eig_herm(M, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching eigenvector columns."""
    A = as_hermitian(M, tol)
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return w[::-1].copy(), V[:, ::-1].copy()


def opnorm(M) -> float:
    w, _ = eig_herm(M)
    return float(np.max(np.abs(w)))


def max_eig(M) -> float:
    return float(eig_herm(M)[0][0])


def min_eig(M) -> float:
    return float(eig_herm(M)[0][-1])


def is_psd(M, tol: float = PSD_TOL) -> bool:
    return min_eig(M) >= -tol


def projector(v) -> np.ndarray:
    """Rank-1 projector onto the (normalised) vector ``v``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero vector has no projector")
    v = v / nrm
    return np.outer(v, v.conj())


def sqrtm_psd(M) -> np.ndarray:
    w, V = eig_herm(M)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis (Hilbert-Schmidt) of the real space of d x d Hermitian matrices."""
    basis = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    s = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = E[j, i] = s
            basis.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = -1j * s
            E[j, i] = 1j * s
            basis.append(E)
    return basis
