"""Tripartite steering: Alice and Bob (uncharacterised) steer Charlie.

Functional and assemblage keys are ``(a, b, x, y)``. The efficiency data is
the triple ``(eta_ab, eta_a, eta_b)`` of joint and marginal click rates.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conic
from .linalg import DimensionError, as_hermitian, eig_herm, kron, partial_trace
from .scenarios import PAULI_X, PAULI_Y, PAULI_Z, MeasurementSet, QuantumState
from .steering import SteeringFunctional
from .strategies import NO_CLICK, enumerate_products

CHARLIE_OPERATORS = {
    "I": np.eye(2, dtype=complex),
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
}

# completion of terms that omit a party's setting
MARGINAL_CONVENTION = "uniform-over-absent-settings"


def sign(outcome: int) -> int:
    """+1 for outcome 1, -1 for outcome 2."""
    return 1 if outcome == 1 else -1


@dataclass
class BipartiteAssemblage3:
    members: dict[tuple[int, int, int, int], np.ndarray]
    includes_no_click: bool = False
    post_selected: bool = False

    def __post_init__(self):
        self.members = {tuple(int(i) for i in k): as_hermitian(M, tol=1e-10) for k, M in self.members.items()}

    @property
    def m(self) -> int:
        return max(max(k[2], k[3]) for k in self.members) + 1

    def trace(self, x: int, y: int, conclusive: bool = True) -> float:
        return sum(
            float(np.trace(M).real)
            for (a, b, xx, yy), M in self.members.items()
            if xx == x and yy == y and (not conclusive or (a != NO_CLICK and b != NO_CLICK))
        )


@dataclass(frozen=True)
class EfficiencyProfile2:
    eta_ab: tuple[tuple[float, ...], ...]
    eta_a: tuple[float, ...]
    eta_b: tuple[float, ...]

    def __post_init__(self):
        ab = tuple(tuple(float(v) for v in row) for row in np.atleast_2d(self.eta_ab))
        a = tuple(float(v) for v in np.atleast_1d(self.eta_a))
        b = tuple(float(v) for v in np.atleast_1d(self.eta_b))
        object.__setattr__(self, "eta_ab", ab)
        object.__setattr__(self, "eta_a", a)
        object.__setattr__(self, "eta_b", b)
        if len(ab) != len(a) or any(len(r) != len(b) for r in ab):
            raise ValueError("eta_ab must be len(eta_a) x len(eta_b)")
        for v in [*a, *b, *(v for r in ab for v in r)]:
            if not 0 <= v <= 1:
                raise ValueError(f"efficiency {v} outside [0, 1]")

    @property
    def m(self) -> int:
        return len(self.eta_a)

    @classmethod
    def uncorrelated(cls, eta: float, m: int) -> "EfficiencyProfile2":
        return cls([[eta * eta] * m] * m, [eta] * m, [eta] * m)

    @classmethod
    def one_sided(cls, eta: float, m: int) -> "EfficiencyProfile2":
        """Alice's detectors are perfect; Bob clicks with probability ``eta``."""
        return cls([[eta] * m] * m, [1.0] * m, [eta] * m)

    @classmethod
    def perfectly_correlated(cls, eta: float, m: int) -> "EfficiencyProfile2":
        return cls([[eta] * m] * m, [eta] * m, [eta] * m)

    @classmethod
    def preset(cls, name: str, eta: float, m: int) -> "EfficiencyProfile2":
        try:
            factory = {
                "uncorrelated": cls.uncorrelated,
                "uncorrelated-isotropic": cls.uncorrelated,
                "one-sided": cls.one_sided,
                "perfectly-correlated": cls.perfectly_correlated,
            }[name]
        except KeyError:
            raise ValueError(f"unknown efficiency preset {name!r}") from None
        return factory(eta, m)

    def frechet_violations(self, tol: float = 1e-12) -> list[str]:
        out = []
        for x, ex in enumerate(self.eta_a):
            for y, ey in enumerate(self.eta_b):
                e = self.eta_ab[x][y]
                if e < ex + ey - 1 - tol or e > min(ex, ey) + tol:
                    out.append(f"eta_ab[{x}][{y}]={e:g} outside Frechet bounds for ({ex:g}, {ey:g})")
        return out

    def swapped(self) -> "EfficiencyProfile2":
        return EfficiencyProfile2(np.array(self.eta_ab).T, self.eta_b, self.eta_a)


@dataclass(frozen=True)
class CorrelatorTerm:
    """``coefficient * <A_x B_y O_C>``; ``None`` marks an absent party."""

    coefficient: float
    alice_setting: int | None = None
    bob_setting: int | None = None
    charlie_operator: str | None = None

    @property
    def is_constant(self) -> bool:
        return self.alice_setting is None and self.bob_setting is None and self.charlie_operator in (None, "I")

    def to_json(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "alice": self.alice_setting,
            "bob": self.bob_setting,
            "charlie": self.charlie_operator,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CorrelatorTerm":
        return cls(float(obj["coefficient"]), obj.get("alice"), obj.get("bob"), obj.get("charlie"))


def load_terms(path) -> list[CorrelatorTerm]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["terms"]
    return [CorrelatorTerm.from_json(t) for t in data]


def dump_terms(terms, path) -> None:
    Path(path).write_text(json.dumps([t.to_json() for t in terms], indent=2) + "\n")


def compile_correlators(terms, m: int, d: int = 2) -> SteeringFunctional:
    """Expand correlator terms into operators ``F_{ab|xy}`` on Charlie.

    Terms that do not involve a party's setting are spread evenly over that
    party's ``m`` settings (and summed over its outcomes); the pure constant
    becomes the offset.
    """
    if d != 2:
        raise ValueError("correlator compilation needs dichotomic (d=2) measurements")
    ops = {(a, b, x, y): np.zeros((2, 2), dtype=complex) for a in (1, 2) for b in (1, 2) for x in range(m) for y in range(m)}
    offset = 0.0
    for t in terms:
        if t.is_constant:
            offset += t.coefficient
            continue
        for s in (t.alice_setting, t.bob_setting):
            if s is not None and not 0 <= s < m:
                raise ValueError(f"setting {s} out of range for m={m}")
        O = CHARLIE_OPERATORS[t.charlie_operator or "I"]
        weight = t.coefficient
        if t.alice_setting is None:
            weight /= m
        if t.bob_setting is None:
            weight /= m
        for (a, b, x, y), F in ops.items():
            if t.alice_setting is not None and x != t.alice_setting:
                continue
            if t.bob_setting is not None and y != t.bob_setting:
                continue
            sa = sign(a) if t.alice_setting is not None else 1
            sb = sign(b) if t.bob_setting is not None else 1
            F += weight * sa * sb * O
    return SteeringFunctional(ops, offset)


def ghz_terms() -> list[CorrelatorTerm]:
    T = CorrelatorTerm
    return [
        T(-3.0730),
        T(0.6219, 2, None, "Z"),
        T(0.6219, None, 2, "Z"),
        T(0.2919, 2, 2, None),
        T(1.2437, 0, 0, "X"),
        T(-1.2437, 0, 1, "Y"),
        T(-1.2437, 1, 0, "Y"),
        T(-1.2437, 1, 1, "X"),
    ]


def w_terms() -> list[CorrelatorTerm]:
    """Coefficients as given, including the asymmetric 0.7771 group."""
    T = CorrelatorTerm
    return [
        T(-2.9797),
        T(0.0454, 2, None, None),
        T(0.0454, None, 2, None),
        T(0.8105, None, None, "Z"),
        T(-0.1324, 0, 0, None),
        T(-0.1324, 1, 1, None),
        T(0.4703, 0, None, "X"),
        T(0.4703, 1, None, "Y"),
        T(0.4703, None, 0, "X"),
        T(0.4703, None, 1, "Y"),
        T(-1.1772, 2, None, "Z"),
        T(-1.1772, None, 2, "Z"),
        T(-0.5046, 2, 2, None),
        T(0.5401, 0, 0, "Z"),
        T(0.5401, 1, 1, "Z"),
        T(0.7771, 0, 2, "X"),
        T(0.7771, 1, 2, "Y"),
        T(0.7771, 2, 2, "Y"),
        T(0.7771, 2, 1, "Y"),
        T(-2.0185, 2, 2, "Z"),
    ]

REFERENCE_QUANTUM_VALUES = {"ghz": 3.4377, "w": 2.6481}
REFERENCE_CRITICAL_ETA = {"ghz": 1 / 3, "w": 0.716}


def tri_assemblage(state: QuantumState, MA: MeasurementSet, MB: MeasurementSet) -> BipartiteAssemblage3:
    """``sigma_{ab|xy} = tr_AB[(M_{a|x} x M_{b|y} x 1) rho]``."""
    if len(state.dims) != 3:
        raise DimensionError("expected a tripartite state")
    dA, dB, dC = state.dims
    if MA.dim != dA or MB.dim != dB:
        raise DimensionError("measurement dimensions do not match the state")
    members = {}
    for x, pa in enumerate(MA.elements):
        for y, pb in enumerate(MB.elements):
            for a, Ea in enumerate(pa, start=1):
                for b, Eb in enumerate(pb, start=1):
                    op = kron(Ea, Eb, np.eye(dC)) @ state.rho
                    members[(a, b, x, y)] = partial_trace(op, state.dims, [2])
    return BipartiteAssemblage3(members)


# ---------------------------------------------------------------------------
# bounds


@dataclass
class TriBound:
    value: float
    solution: conic.ConicSolution
    program: conic.ConicProgram
    strategies: list
    metadata: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return self.solution.status


def _tri_operator(F: SteeringFunctional, lam, eta_ab=None) -> np.ndarray:
    d = F.d
    G = np.zeros((d, d), dtype=complex)
    pa, pb = lam.alice.outcomes, lam.bob.outcomes
    for x, a in enumerate(pa):
        if a == NO_CLICK:
            continue
        for y, b in enumerate(pb):
            if b == NO_CLICK:
                continue
            Fk = F.get((a, b, x, y))
            if Fk is not None:
                G += Fk / (eta_ab[x][y] if eta_ab is not None else 1.0)
    return G


def _outcomes(F: SteeringFunctional) -> int:
    return max(max(k[0], k[1]) for k in F.operators)


def tri_lhs_bound(F: SteeringFunctional, m: int | None = None, **opts) -> TriBound:
    m = F.m if m is None else m
    d = F.d
    strategies = enumerate_products(m, _outcomes(F))
    prog = conic.ConicProgram("max", offset=F.offset)
    blocks = [prog.add_block("herm", d) for _ in strategies]
    for j, lam in zip(blocks, strategies):
        prog.set_objective(j, _tri_operator(F, lam))
    prog.add_constraint({j: np.eye(d) for j in blocks}, 1.0)
    sol = conic.solve(prog, **opts)
    if sol.status != conic.OPTIMAL:
        raise RuntimeError(f"conic solver returned status {sol.status!r}")
    return TriBound(sol.value, sol, prog, strategies)


def tri_lhs_bound_by_enumeration(F: SteeringFunctional, m: int | None = None) -> float:
    m = F.m if m is None else m
    return F.offset + max(eig_herm(_tri_operator(F, lam))[0][0] for lam in enumerate_products(m, _outcomes(F)))


def tri_ps_lhs_bound(F: SteeringFunctional, eta: EfficiencyProfile2, d_C: int | None = None, **opts) -> TriBound:
    """Post-selected LHS bound with joint and marginal efficiency constraints.

    An infeasible efficiency triple is not an error: the returned bound has
    status ``infeasible`` and ``value = -inf``, meaning no a-priori classical
    model reproduces the observed click statistics at all.
    """
    m = eta.m
    d = F.d if d_C is None else d_C
    for row in eta.eta_ab:
        if min(row) <= 0:
            raise ValueError("joint efficiencies must be positive for post-selection")
    for msg in eta.frechet_violations():
        warnings.warn(msg, stacklevel=2)
    strategies = enumerate_products(m, _outcomes(F), include_no_click=True)
    prog = conic.ConicProgram("max", offset=F.offset)
    blocks = [prog.add_block("herm", d) for _ in strategies]
    for j, lam in zip(blocks, strategies):
        prog.set_objective(j, _tri_operator(F, lam, eta.eta_ab))
    eye = np.eye(d)
    prog.add_constraint({j: eye for j in blocks}, 1.0)
    clicks_a = [[lam.alice.outcomes[x] != NO_CLICK for x in range(m)] for lam in strategies]
    clicks_b = [[lam.bob.outcomes[y] != NO_CLICK for y in range(m)] for lam in strategies]
    for x in range(m):
        for y in range(m):
            js = [j for j, ca, cb in zip(blocks, clicks_a, clicks_b) if ca[x] and cb[y]]
            prog.add_constraint({j: eye for j in js}, eta.eta_ab[x][y])
    # marginal click rates; the free setting of the other party drops out for product strategies
    for x in range(m):
        prog.add_constraint({j: eye for j, ca in zip(blocks, clicks_a) if ca[x]}, eta.eta_a[x])
    for y in range(m):
        prog.add_constraint({j: eye for j, cb in zip(blocks, clicks_b) if cb[y]}, eta.eta_b[y])
    sol = conic.solve(prog, **opts)
    meta = {"marginal_convention": MARGINAL_CONVENTION}
    if sol.status == conic.INFEASIBLE:
        meta["message"] = "efficiencies inconsistent with any LHS model"
        return TriBound(-np.inf, sol, prog, strategies, meta)
    if sol.status != conic.OPTIMAL:
        raise RuntimeError(f"conic solver returned status {sol.status!r}")
    return TriBound(sol.value, sol, prog, strategies, meta)
