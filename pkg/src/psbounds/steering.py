"""Ideal and post-selected LHS bounds for bipartite steering functionals.

Keys of assemblage members and functional operators are ``(a, x)`` with
conclusive outcomes ``a = 1..n`` (``0`` is the no-click outcome) and
settings ``x = 0..m-1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import conic
from .linalg import PSD_TOL, as_hermitian, eig_herm, hermitian_basis, is_psd
from .strategies import NO_CLICK, DeterministicStrategy, enumerate_strategies

SMALL_ETA = 1e-6


class SharedProjectorError(ValueError):
    pass


class NoViolationError(ValueError):
    """The noise level leaves no efficiency at which a violation is possible."""


class InfeasibleProfileError(RuntimeError):
    pass


@dataclass
class Assemblage:
    """Subnormalised conditional states keyed by ``(a, x)``."""

    members: dict[tuple[int, int], np.ndarray]
    includes_no_click: bool = False
    post_selected: bool = False

    def __post_init__(self):
        self.members = {(int(a), int(x)): as_hermitian(M, tol=1e-10) for (a, x), M in self.members.items()}
        dims = {M.shape[0] for M in self.members.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent member dimensions {sorted(dims)}")

    @property
    def d(self) -> int:
        return next(iter(self.members.values())).shape[0]

    @property
    def m(self) -> int:
        return max(x for _, x in self.members) + 1

    @property
    def outcomes(self) -> int:
        return max(a for a, _ in self.members)

    def conclusive_trace(self, x: int) -> float:
        return sum(float(np.trace(M).real) for (a, xx), M in self.members.items() if xx == x and a != NO_CLICK)

    def total_trace(self, x: int) -> float:
        return sum(float(np.trace(M).real) for (a, xx), M in self.members.items() if xx == x)

    def check(self, tol: float = PSD_TOL) -> None:
        for key, M in self.members.items():
            if not is_psd(M, tol):
                raise ValueError(f"member {key} is not PSD")
        for x in range(self.m):
            t = self.conclusive_trace(x) if self.post_selected else self.total_trace(x)
            if abs(t - 1) > 1e-8:
                raise ValueError(f"setting {x}: trace {t:.10f} != 1")


@dataclass
class SteeringFunctional:
    """Operators ``F`` keyed like the assemblage it acts on, plus a constant offset."""

    operators: dict[tuple, np.ndarray]
    offset: float = 0.0

    def __post_init__(self):
        self.operators = {tuple(int(i) for i in k): as_hermitian(F, tol=1e-10) for k, F in self.operators.items()}

    @property
    def d(self) -> int:
        return next(iter(self.operators.values())).shape[0]

    @property
    def m(self) -> int:
        return max(k[-1] for k in self.operators) + 1

    @property
    def outcomes(self) -> int:
        return max(k[0] for k in self.operators)

    def get(self, key: tuple) -> np.ndarray | None:
        return self.operators.get(key)


@dataclass(frozen=True)
class EfficiencyProfile:
    etas: tuple[float, ...]

    def __post_init__(self):
        etas = tuple(float(e) for e in np.atleast_1d(self.etas))
        object.__setattr__(self, "etas", etas)
        for e in etas:
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"efficiency {e} outside [0, 1]")

    @classmethod
    def uniform(cls, eta: float, m: int) -> "EfficiencyProfile":
        return cls(tuple([eta] * m))

    @property
    def m(self) -> int:
        return len(self.etas)

    @property
    def mean(self) -> float:
        return float(np.mean(self.etas))

    def require_positive(self) -> None:
        for x, e in enumerate(self.etas):
            if e <= 0:
                raise ValueError(f"efficiency of setting {x} is zero; post-selection undefined")
            if e < SMALL_ETA:
                warnings.warn(f"efficiency {e:g} of setting {x} is tiny; program is ill-conditioned", stacklevel=3)


def _profile(eta) -> EfficiencyProfile:
    return eta if isinstance(eta, EfficiencyProfile) else EfficiencyProfile(tuple(np.atleast_1d(eta)))


def evaluate(F: SteeringFunctional, A) -> float:
    """``offset + sum tr[F_k sigma_k]`` over the keys of ``F``."""
    total = F.offset
    for key, Fk in F.operators.items():
        if key not in A.members:
            raise KeyError(f"assemblage has no member {key}")
        S = A.members[key]
        if S.shape != Fk.shape:
            raise ValueError(f"dimension mismatch at {key}: {Fk.shape} vs {S.shape}")
        total += float(np.real(np.trace(Fk @ S)))
    return total


# ---------------------------------------------------------------------------
# ideal LHS bound


@dataclass
class LhsBound:
    value: float
    hidden_states: list[np.ndarray]
    strategies: list[DeterministicStrategy]
    solution: conic.ConicSolution | None = None
    program: conic.ConicProgram | None = None


def _strategy_operator(F: SteeringFunctional, lam: DeterministicStrategy, etas=None) -> np.ndarray:
    d = F.d
    G = np.zeros((d, d), dtype=complex)
    for x, a in enumerate(lam.outcomes):
        if a == NO_CLICK:
            continue
        Fk = F.get((a, x))
        if Fk is not None:
            G += Fk / (etas[x] if etas is not None else 1.0)
    return G


def _dims(F: SteeringFunctional, d, m, outcomes) -> tuple[int, int, int]:
    d = F.d if d is None else d
    m = F.m if m is None else m
    outcomes = max(F.outcomes, 2) if outcomes is None else outcomes
    if d != F.d:
        raise ValueError(f"functional acts on dimension {F.d}, not {d}")
    if any(k[-1] >= m or k[0] > outcomes or k[0] < 1 for k in F.operators):
        raise ValueError("functional keys outside the declared scenario")
    return d, m, outcomes


def lhs_bound(F: SteeringFunctional, d=None, m=None, outcomes=None, **opts) -> LhsBound:
    """Maximum of ``evaluate(F, .)`` over LHS assemblages, by conic program."""
    d, m, outcomes = _dims(F, d, m, outcomes)
    strategies = enumerate_strategies(m, outcomes)
    prog = conic.ConicProgram("max", offset=F.offset)
    blocks = [prog.add_block("herm", d) for _ in strategies]
    for j, lam in zip(blocks, strategies):
        prog.set_objective(j, _strategy_operator(F, lam))
    prog.add_constraint({j: np.eye(d) for j in blocks}, 1.0)
    sol = conic.solve(prog, **opts)
    _require_optimal(sol)
    return LhsBound(sol.value, [sol.primal[j] for j in blocks], strategies, sol, prog)


def lhs_bound_by_enumeration(F: SteeringFunctional, d=None, m=None, outcomes=None) -> float:
    """Closed form: the best strategy carries all weight on its top eigenvector."""
    d, m, outcomes = _dims(F, d, m, outcomes)
    return F.offset + max(eig_herm(_strategy_operator(F, lam))[0][0] for lam in enumerate_strategies(m, outcomes))


def _require_optimal(sol: conic.ConicSolution) -> None:
    if sol.status != conic.OPTIMAL:
        raise RuntimeError(f"conic solver returned status {sol.status!r}")


# ---------------------------------------------------------------------------
# post-selected LHS bound


@dataclass
class PsBound:
    value: float
    solution: conic.ConicSolution
    program: conic.ConicProgram
    strategies: list

    @property
    def hidden_states(self) -> list[np.ndarray]:
        return self.solution.primal[: len(self.strategies)]


def build_ps_program(F: SteeringFunctional, eta, d=None, outcomes=None) -> tuple[conic.ConicProgram, list]:
    eta = _profile(eta)
    eta.require_positive()
    d, m, outcomes = _dims(F, d, eta.m, outcomes)
    strategies = enumerate_strategies(m, outcomes, include_no_click=True)
    prog = conic.ConicProgram("max", offset=F.offset)
    blocks = [prog.add_block("herm", d) for _ in strategies]
    for j, lam in zip(blocks, strategies):
        prog.set_objective(j, _strategy_operator(F, lam, eta.etas))
    eye = np.eye(d)
    prog.add_constraint({j: eye for j in blocks}, 1.0)
    for x in range(m):
        prog.add_constraint({j: eye for j, lam in zip(blocks, strategies) if lam.outcomes[x] == NO_CLICK}, 1 - eta.etas[x])
    return prog, strategies


def ps_lhs_bound(F: SteeringFunctional, eta, d=None, outcomes=None, **opts) -> PsBound:
    """Post-selected LHS bound of ``F`` at efficiencies ``eta``."""
    prog, strategies = build_ps_program(F, eta, d, outcomes)
    sol = conic.solve(prog, **opts)
    if sol.status == conic.INFEASIBLE:
        # every eta in (0, 1]^m admits an a-priori model; reaching here is a solver fault
        raise RuntimeError("post-selected steering program reported infeasible")
    _require_optimal(sol)
    return PsBound(sol.value, sol, prog, strategies)


@dataclass
class DualCertificate:
    mu: float
    nus: tuple[float, ...]
    value: float


@dataclass
class PsDualBound:
    value: float
    certificate: DualCertificate
    solution: conic.ConicSolution
    program: conic.ConicProgram


def ps_lhs_bound_dual(F: SteeringFunctional, eta, d=None, outcomes=None, **opts) -> PsDualBound:
    """Minimise ``mu + sum_x nu_x (1 - eta_x)`` subject to one LMI per a-priori strategy."""
    eta = _profile(eta)
    eta.require_positive()
    d, m, outcomes = _dims(F, d, eta.m, outcomes)
    # a setting with eta_x = 1 never fails to click: its no-click strategies carry no
    # weight, so their LMIs and nu_x drop out (nu_x would otherwise be unbounded above)
    lossy = [x for x in range(m) if eta.etas[x] < 1.0]
    strategies = [
        lam
        for lam in enumerate_strategies(m, outcomes, include_no_click=True)
        if all(a != NO_CLICK or x in lossy for x, a in enumerate(lam.outcomes))
    ]
    prog = conic.ConicProgram("min", offset=F.offset)
    free = prog.add_block("free", 1 + len(lossy))
    prog.set_objective(free, np.array([1.0] + [1 - eta.etas[x] for x in lossy]))
    basis = hermitian_basis(d)
    for lam in strategies:
        j = prog.add_block("herm", d)
        G = _strategy_operator(F, lam, eta.etas)
        clicks = np.array([1.0] + [float(lam.outcomes[x] == NO_CLICK) for x in lossy])
        # slack_lam = (mu + sum_x nu_x [lam(x)=0]) 1 - G_lam, written in a Hermitian basis
        for E in basis:
            trE = float(np.trace(E).real)
            prog.add_constraint({j: E, free: -trE * clicks}, -float(np.real(np.trace(E @ G))))
    sol = conic.solve(prog, **opts)
    _require_optimal(sol)
    mu, *reduced = sol.primal[free]
    nus = [0.0] * m
    for x, v in zip(lossy, reduced):
        nus[x] = float(v)
    if len(lossy) < m:
        # zero-cost multipliers for lossless settings: smallest common value covering the dropped LMIs
        need = 0.0
        for lam in enumerate_strategies(m, outcomes, include_no_click=True):
            if all(a != NO_CLICK or x in lossy for x, a in enumerate(lam.outcomes)):
                continue
            shift = mu + sum(nus[x] for x in lossy if lam.outcomes[x] == NO_CLICK)
            need = max(need, eig_herm(_strategy_operator(F, lam, eta.etas))[0][0] - shift)
        for x in range(m):
            if x not in lossy:
                nus[x] = need
    cert = DualCertificate(float(mu), tuple(nus), sol.value)
    return PsDualBound(sol.value, cert, sol, prog)


def check_dual_certificate(F: SteeringFunctional, eta, mu: float, nus, d=None, outcomes=None) -> tuple[float, float]:
    """Return ``(objective, worst min-eigenvalue)`` of a candidate dual point.

    The point certifies ``objective`` as an upper bound on the post-selected
    LHS value whenever the worst eigenvalue is non-negative.
    """
    eta = _profile(eta)
    d, m, outcomes = _dims(F, d, eta.m, outcomes)
    nus = np.asarray(nus, dtype=float)
    worst = math.inf
    for lam in enumerate_strategies(m, outcomes, include_no_click=True):
        shift = mu + sum(nus[x] for x, a in enumerate(lam.outcomes) if a == NO_CLICK)
        S = shift * np.eye(d) - _strategy_operator(F, lam, eta.etas)
        worst = min(worst, float(np.linalg.eigvalsh(S)[0]))
    obj = F.offset + mu + float(nus @ (1 - np.asarray(eta.etas)))
    return obj, worst


def ps_lhs_member(assemblage: Assemblage, eta, **opts) -> conic.ConicSolution:
    """Feasibility program: does a post-selected assemblage admit an a-priori LHS model at ``eta``?

    Returns the solver output; status ``optimal`` means a model was found.
    """
    eta = _profile(eta)
    eta.require_positive()
    d, m, n = assemblage.d, eta.m, assemblage.outcomes
    strategies = enumerate_strategies(m, n, include_no_click=True)
    prog = conic.ConicProgram("max")
    blocks = [prog.add_block("herm", d) for _ in strategies]
    basis = hermitian_basis(d)
    eye = np.eye(d)
    prog.add_constraint({j: eye for j in blocks}, 1.0)
    for x in range(m):
        for a in range(1, n + 1):
            target = eta.etas[x] * assemblage.members.get((a, x), np.zeros((d, d)))
            js = [j for j, lam in zip(blocks, strategies) if lam.outcomes[x] == a]
            for E in basis:
                prog.add_constraint({j: E for j in js}, float(np.real(np.trace(E @ target))))
    # no-click traces follow from the rows above together with the total trace
    return conic.solve(prog, **opts)


# ---------------------------------------------------------------------------
# projective functionals


def _check_projector(P: np.ndarray, key) -> np.ndarray:
    P = as_hermitian(P, tol=1e-9)
    if np.max(np.abs(P @ P - P)) > 1e-9 or abs(np.trace(P).real - 1) > 1e-9:
        raise ValueError(f"{key} is not a rank-1 projector")
    return P


def cos_theta(projectors: Mapping[tuple[int, int], np.ndarray]) -> float:
    """Largest overlap ``sqrt(tr[P Q])`` between projectors of distinct measurements."""
    settings = sorted({x for _, x in projectors})
    if len(settings) < 2:
        raise ValueError("cos theta needs at least two measurements")
    best = 0.0
    items = list(projectors.items())
    for (a, x), P in items:
        for (b, y), Q in items:
            if y > x:
                best = max(best, math.sqrt(max(float(np.real(np.trace(P @ Q))), 0.0)))
    return best


def projective_functional(projectors: Mapping[tuple[int, int], np.ndarray], eta) -> SteeringFunctional:
    """``F_{a|x} = eta_x Pi_{a|x}`` for rank-1 projectors ``Pi``."""
    eta = _profile(eta)
    ops = {}
    for (a, x), P in projectors.items():
        ops[(a, x)] = eta.etas[x] * _check_projector(P, (a, x))
    if len({x for _, x in projectors}) > 1 and cos_theta(projectors) > 1 - 1e-9:
        raise SharedProjectorError("two measurements share a common projector")
    return SteeringFunctional(ops)


def analytic_upper_bound(m: int, cos_th: float, mean_eta: float) -> float:
    if m < 2:
        raise ValueError("bound needs m >= 2")
    if not 0 <= cos_th < 1:
        raise ValueError("cos theta must lie in [0, 1)")
    return (1 - cos_th) + m * mean_eta * cos_th


def critical_mean_eta(m: int, cos_th: float, w: float, d: int) -> float:
    """Mean efficiency above which the isotropic state violates the projective inequality."""
    denom = w + (1 - w) / d - cos_th
    if denom <= 0:
        raise NoViolationError(f"no violation in this noise regime (w={w}, cos theta={cos_th})")
    return (1 - cos_th) / denom / m
