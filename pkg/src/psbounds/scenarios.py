"""States, measurements and assemblages for the worked examples.

Conventions: the uncharacterised party is the first tensor factor; for
dichotomic measurements outcome 1 is the +1 eigenvalue and outcome 2 the -1
eigenvalue. Steering constructions measure ``Pi^T`` on Alice so that Bob's
conditional states are proportional to ``Pi``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, as_hermitian, eig_herm, is_psd, kron, partial_trace, projector, sqrtm_psd
from .steering import Assemblage, EfficiencyProfile
from .strategies import NO_CLICK

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class QuantumState:
    dims: tuple[int, ...]
    rho: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.rho = as_hermitian(self.rho, tol=1e-10)
        n = int(np.prod(self.dims))
        if self.rho.shape != (n, n):
            raise DimensionError(f"density matrix {self.rho.shape} does not match dims {self.dims}")
        if abs(np.trace(self.rho).real - 1) > 1e-10:
            raise ValueError("density matrix must have unit trace")
        if not is_psd(self.rho):
            raise ValueError("density matrix is not PSD")

    @classmethod
    def pure(cls, psi, dims) -> "QuantumState":
        return cls(tuple(dims), projector(psi))

    def marginal(self, keep) -> np.ndarray:
        return partial_trace(self.rho, self.dims, keep)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.rho @ self.rho).real - 1) <= tol


@dataclass
class MeasurementSet:
    """``elements[x][a-1]`` is the POVM element for outcome ``a`` of setting ``x``."""

    elements: list[list[np.ndarray]]

    def __post_init__(self):
        self.elements = [[as_hermitian(E, tol=1e-10) for E in povm] for povm in self.elements]
        d = self.dim
        for x, povm in enumerate(self.elements):
            for E in povm:
                if E.shape != (d, d):
                    raise DimensionError("POVM elements of different dimension")
                if not is_psd(E):
                    raise ValueError(f"POVM element of setting {x} is not PSD")
            if np.max(np.abs(sum(povm) - np.eye(d))) > 1e-10:
                raise ValueError(f"setting {x} does not sum to the identity")

    @property
    def dim(self) -> int:
        return self.elements[0][0].shape[0]

    @property
    def m(self) -> int:
        return len(self.elements)

    @property
    def outcomes(self) -> int:
        return max(len(p) for p in self.elements)

    def element(self, a: int, x: int) -> np.ndarray:
        return self.elements[x][a - 1]

    def as_projectors(self) -> dict[tuple[int, int], np.ndarray]:
        return {(a + 1, x): E for x, povm in enumerate(self.elements) for a, E in enumerate(povm)}

    def transposed(self) -> "MeasurementSet":
        return MeasurementSet([[E.T.copy() for E in povm] for povm in self.elements])

    @classmethod
    def from_bases(cls, bases) -> "MeasurementSet":
        """Projective measurements from unitary columns (one matrix per setting)."""
        return cls([[projector(U[:, i]) for i in range(U.shape[1])] for U in (np.asarray(B) for B in bases)])


# states --------------------------------------------------------------------


def max_entangled(d: int) -> QuantumState:
    if d < 2:
        raise ValueError("d must be at least 2")
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1
    return QuantumState.pure(psi / np.sqrt(d), (d, d))


def isotropic(d: int, w: float) -> QuantumState:
    if not 0 <= w <= 1:
        raise ValueError("w must lie in [0, 1]")
    phi = max_entangled(d).rho
    return QuantumState((d, d), w * phi + (1 - w) * np.eye(d * d) / d**2)


def partially_entangled(phi: float) -> QuantumState:
    """``cos(phi)|00> + sin(phi)|11>``."""
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = np.cos(phi), np.sin(phi)
    return QuantumState.pure(psi, (2, 2))


def product_state(*rhos) -> QuantumState:
    rhos = [as_hermitian(r) for r in rhos]
    return QuantumState(tuple(r.shape[0] for r in rhos), kron(*rhos))


def _basis_ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def ghz_state() -> QuantumState:
    return QuantumState.pure((_basis_ket("000") + _basis_ket("111")) / np.sqrt(2), (2, 2, 2))


def w_state() -> QuantumState:
    psi = (_basis_ket("001") + _basis_ket("010") + _basis_ket("100")) / np.sqrt(3)
    return QuantumState.pure(psi, (2, 2, 2))


# measurements ---------------------------------------------------------------


def _pm_projectors(P: np.ndarray) -> list[np.ndarray]:
    w, V = eig_herm(P)  # descending: +1 first
    return [projector(V[:, 0]), projector(V[:, 1])]


def pauli_measurements() -> MeasurementSet:
    """X, Y, Z in that order (settings 0, 1, 2)."""
    return MeasurementSet([_pm_projectors(P) for P in (PAULI_X, PAULI_Y, PAULI_Z)])


def fourier_matrix(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def mub_measurements(d: int, m: int) -> MeasurementSet:
    """Computational and Fourier bases; for qubits the third is the Y basis."""
    bases = [np.eye(d), fourier_matrix(d)]
    if d == 2:
        bases.append(np.array([[1, 1], [1j, -1j]]) / np.sqrt(2))
    else:
        # quadratic-phase bases are mutually unbiased for odd prime d
        for r in range(1, d):
            D = np.diag(np.exp(2j * np.pi * r * np.arange(d) ** 2 / d))
            bases.append(D @ fourier_matrix(d))
    if m > len(bases):
        raise ValueError(f"only {len(bases)} bases available for d={d}")
    return MeasurementSet.from_bases(bases[:m])


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_measurements(d: int, m: int, rng: np.random.Generator) -> MeasurementSet:
    return MeasurementSet.from_bases([random_unitary(d, rng) for _ in range(m)])


def qubit_measurement(theta: float, phi: float = 0.0) -> list[np.ndarray]:
    """Projectors onto +/- along the Bloch direction (theta, phi)."""
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    obs = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return [(np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2]


# assemblages ---------------------------------------------------------------


def assemblage_from_state(state: QuantumState, M: MeasurementSet) -> Assemblage:
    """``sigma_{a|x} = tr_A[(M_{a|x} x 1) rho]`` with Alice as the first factor."""
    if len(state.dims) != 2:
        raise DimensionError("expected a bipartite state")
    dA, dB = state.dims
    if M.dim != dA:
        raise DimensionError(f"measurements act on {M.dim}, Alice holds {dA}")
    members = {}
    for x, povm in enumerate(M.elements):
        for a, E in enumerate(povm, start=1):
            members[(a, x)] = partial_trace(kron(E, np.eye(dB)) @ state.rho, (dA, dB), [1])
    return Assemblage(members)


def bob_marginal(A: Assemblage, x: int = 0) -> np.ndarray:
    return sum(M for (a, xx), M in A.members.items() if xx == x)


def apply_loss(A: Assemblage, eta) -> Assemblage:
    """A-priori assemblage: conclusive members scaled by ``eta_x``, no-click gets ``(1-eta_x) rho_B``."""
    if A.includes_no_click or A.post_selected:
        raise ValueError("apply_loss expects an ideal assemblage")
    eta = eta if isinstance(eta, EfficiencyProfile) else EfficiencyProfile(tuple(np.atleast_1d(eta)))
    if eta.m != A.m:
        raise ValueError(f"{eta.m} efficiencies for {A.m} settings")
    members = {}
    for (a, x), S in A.members.items():
        members[(a, x)] = eta.etas[x] * S
    for x in range(A.m):
        members[(NO_CLICK, x)] = (1 - eta.etas[x]) * bob_marginal(A, x)
    return Assemblage(members, includes_no_click=True)


def post_select(A0: Assemblage) -> tuple[Assemblage, EfficiencyProfile]:
    """Drop no-click members and renormalise each setting by its efficiency."""
    etas = []
    for x in range(A0.m):
        e = A0.conclusive_trace(x)
        if e <= 0:
            raise ValueError(f"setting {x} never clicks")
        etas.append(e)
    members = {(a, x): S / etas[x] for (a, x), S in A0.members.items() if a != NO_CLICK}
    return Assemblage(members, post_selected=True), EfficiencyProfile(tuple(min(e, 1.0) for e in etas))


def steered_projectors_for_pure_state(state: QuantumState, projectors):
    """Bob's normalised steered projectors and outcome probabilities for a pure state.

    Returns ``(Pi', P)`` dicts keyed by ``(a, x)``. A rank-deficient marginal
    is handled by restricting to its support, with a warning.
    """
    if not state.is_pure():
        raise ValueError("state must be pure")
    rho_B = state.marginal([1])
    w, V = eig_herm(rho_B)
    if w[-1] <= 1e-12:
        warnings.warn("marginal is rank deficient; restricting to its support", stacklevel=2)
    root = sqrtm_psd(rho_B)
    out, probs = {}, {}
    for key, P in projectors.items():
        p = float(np.real(np.trace(rho_B @ P)))
        probs[key] = p
        if p > 1e-14:
            out[key] = root @ P @ root / p
        else:
            out[key] = np.zeros_like(P)
    return out, probs
