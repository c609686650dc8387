"""Explicit LHS models for lossy assemblages at low mean efficiency.

The untrusted party is replaced by ``m`` copies, one per setting, each with
an extra flag level. Exactly one copy holds the real state (copy ``x`` with
weight ``eta_x``), the others hold the flag. Measuring every copy once yields
a hidden variable ``a = (a_0, ..., a_{m-1})`` and the response rule outputs
``a_x`` on input ``x``, with the flag read as a no-click.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, partial_trace
from .scenarios import MeasurementSet, QuantumState, apply_loss, assemblage_from_state, post_select
from .steering import Assemblage, EfficiencyProfile, SteeringFunctional, evaluate, lhs_bound, ps_lhs_bound

FLAG = 0


@dataclass
class ExtensionModel:
    """``hidden_states[a] = (p(a), rho_a)``; ``rho_a`` is ``None`` when ``p(a) = 0``."""

    hidden_states: dict[tuple[int, ...], tuple[float, np.ndarray | None]]
    m: int
    outcomes: int
    d: int

    def check(self, tol: float = 1e-10) -> None:
        total = sum(p for p, _ in self.hidden_states.values())
        if abs(total - 1) > tol:
            raise ValueError(f"weights sum to {total}")
        for a, (p, rho) in self.hidden_states.items():
            if p < -tol:
                raise ValueError(f"negative weight for {a}")
            if p > tol and abs(np.trace(rho).real - 1) > 1e-9:
                raise ValueError(f"hidden state {a} is not normalised")


def _flagged_povm(povm: list[np.ndarray]) -> list[np.ndarray]:
    """Embed a POVM into one extra dimension: index 0 is the flag element."""
    d = povm[0].shape[0]
    flag = np.zeros((d + 1, d + 1), dtype=complex)
    flag[0, 0] = 1
    out = [flag]
    for E in povm:
        Et = np.zeros((d + 1, d + 1), dtype=complex)
        Et[1:, 1:] = E
        out.append(Et)
    return out


def _flagged_state(state: QuantumState) -> np.ndarray:
    """``rho_AB`` on ``(dA + 1) x dB`` with the flag level of Alice unoccupied."""
    dA, dB = state.dims
    R = state.rho.reshape(dA, dB, dA, dB)
    out = np.zeros((dA + 1, dB, dA + 1, dB), dtype=complex)
    out[1:, :, 1:, :] = R
    return out.reshape((dA + 1) * dB, (dA + 1) * dB)


def build_extension_model(state: QuantumState, M: MeasurementSet, eta) -> ExtensionModel:
    eta = eta if isinstance(eta, EfficiencyProfile) else EfficiencyProfile(tuple(np.atleast_1d(eta)))
    m = M.m
    if eta.m != m:
        raise ValueError(f"{eta.m} efficiencies for {m} settings")
    if len(state.dims) != 2 or state.dims[0] != M.dim:
        raise DimensionError("state and measurement dimensions do not match")
    t = m * eta.mean
    if t > 1 + 1e-12:
        raise ValueError(f"mean efficiency {eta.mean:g} exceeds 1/m; no such model exists")
    dA, dB = state.dims
    n = M.outcomes
    rho_ext = _flagged_state(state)
    rho_B = state.marginal([1])
    flag_ket = np.zeros(dA + 1)
    flag_ket[0] = 1
    povms = [_flagged_povm(p) for p in M.elements]
    # per-branch pieces: copy x holds rho_AB, every other copy sits on the flag
    branch = {}
    for x in range(m):
        for a in range(n + 1):
            op = np.kron(povms[x][a], np.eye(dB)) @ rho_ext
            branch[(a, x)] = partial_trace(op, (dA + 1, dB), [1])
    flag_overlap = [[float(np.real(flag_ket @ E @ flag_ket)) for E in povms[y]] for y in range(m)]
    weights = [e / t for e in eta.etas] if t > 0 else [0.0] * m

    hidden = {}
    for avec in itertools.product(range(n + 1), repeat=m):
        sigma = np.zeros((dB, dB), dtype=complex)
        for x in range(m):
            factor = np.prod([flag_overlap[y][avec[y]] for y in range(m) if y != x])
            if factor:
                sigma += t * weights[x] * factor * branch[(avec[x], x)]
        if all(a == FLAG for a in avec):
            sigma += (1 - t) * rho_B
        p = float(np.trace(sigma).real)
        hidden[avec] = (p, sigma / p) if p > 1e-15 else (0.0, None)
    model = ExtensionModel(hidden, m, n, dB)
    model.check()
    return model


def induced_assemblage(model: ExtensionModel) -> Assemblage:
    d = model.d
    members = {(a, x): np.zeros((d, d), dtype=complex) for x in range(model.m) for a in range(model.outcomes + 1)}
    for avec, (p, rho) in model.hidden_states.items():
        if p == 0:
            continue
        for x, a in enumerate(avec):
            members[(a, x)] += p * rho
    return Assemblage(members, includes_no_click=True)


def max_entry_mismatch(A: Assemblage, B: Assemblage) -> float:
    keys = set(A.members) | set(B.members)
    worst = 0.0
    for k in keys:
        if k not in A.members or k not in B.members:
            return np.inf
        worst = max(worst, float(np.max(np.abs(A.members[k] - B.members[k]))))
    return worst


def reproduction_error(state: QuantumState, M: MeasurementSet, eta) -> float:
    """Entrywise distance between the model's assemblage and the lossy quantum one."""
    model = build_extension_model(state, M, eta)
    return max_entry_mismatch(induced_assemblage(model), apply_loss(assemblage_from_state(state, M), eta))


@dataclass
class SaturationReport:
    model_value: float
    bound: float

    @property
    def gap(self) -> float:
        return abs(self.model_value - self.bound)


def saturation_check(state: QuantumState, M: MeasurementSet, functional: SteeringFunctional, eta, **opts) -> SaturationReport:
    """Value of ``functional`` on the post-selected model assemblage against the SDP bound."""
    model = build_extension_model(state, M, eta)
    A_ps, _ = post_select(induced_assemblage(model))
    bound = ps_lhs_bound(functional, eta, **opts).value
    return SaturationReport(evaluate(functional, A_ps), bound)


@dataclass
class ReductionReport:
    ps_value: float
    ideal_value: float
    max_no_click_weight: float
    tol: float = 1e-6
    weight_tol: float = 1e-7

    @property
    def difference(self) -> float:
        return abs(self.ps_value - self.ideal_value)

    @property
    def passed(self) -> bool:
        return self.difference <= self.tol and self.max_no_click_weight <= self.weight_tol


def ideal_reduction_check(F: SteeringFunctional, d: int | None = None, m: int | None = None, **opts) -> ReductionReport:
    """At unit efficiency the post-selected bound must equal the ideal one."""
    m = F.m if m is None else m
    ps = ps_lhs_bound(F, EfficiencyProfile.uniform(1.0, m), d=d, **opts)
    ideal = lhs_bound(F, d=d, m=m, **opts)
    weights = [
        float(np.trace(S).real)
        for S, lam in zip(ps.hidden_states, ps.strategies)
        if lam.no_click_count() > 0
    ]
    return ReductionReport(ps.value, ideal.value, max(weights, default=0.0))

