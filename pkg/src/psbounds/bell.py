"""LHV and post-selected LHV bounds for bipartite Bell scenarios."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from . import conic
from .linalg import DimensionError, kron
from .multipartite import EfficiencyProfile2, sign
from .scenarios import MeasurementSet, QuantumState, partially_entangled, qubit_measurement
from .strategies import NO_CLICK, enumerate_products
from .thresholds import bisect_crossing


@dataclass
class Behaviour:
    """``P(ab|xy)`` keyed by ``(a, b, x, y)``."""

    table: dict[tuple[int, int, int, int], float]
    includes_no_click: bool = False

    def __post_init__(self):
        self.table = {tuple(int(i) for i in k): float(v) for k, v in self.table.items()}
        for k, v in self.table.items():
            if v < -1e-12:
                raise ValueError(f"negative probability at {k}")

    @property
    def m(self) -> int:
        return max(max(k[2], k[3]) for k in self.table) + 1

    def normalisation(self, x: int, y: int, conclusive: bool = False) -> float:
        return sum(
            v
            for (a, b, xx, yy), v in self.table.items()
            if (xx, yy) == (x, y) and (not conclusive or (a != NO_CLICK and b != NO_CLICK))
        )


@dataclass
class BellFunctional:
    coefficients: dict[tuple[int, int, int, int], float]
    offset: float = 0.0

    def __post_init__(self):
        self.coefficients = {tuple(int(i) for i in k): float(v) for k, v in self.coefficients.items()}
        if not all(np.isfinite(v) for v in self.coefficients.values()) or not np.isfinite(self.offset):
            raise ValueError("Bell coefficients must be finite")

    @property
    def m(self) -> int:
        return max(max(k[2], k[3]) for k in self.coefficients) + 1

    @property
    def outcomes(self) -> int:
        return max(max(k[0], k[1]) for k in self.coefficients)

    def evaluate(self, P: Behaviour) -> float:
        return self.offset + sum(c * P.table.get(k, 0.0) for k, c in self.coefficients.items())


def tilted_chsh(alpha: float) -> BellFunctional:
    """``alpha <A0 B0 + A1 B0> + <A0 B1 - A1 B1>``; outcome 1 is +1."""
    if not 1.0 <= alpha <= 1.5:
        warnings.warn(f"alpha={alpha} outside the studied range [1, 1.5]", stacklevel=2)
    C = [[alpha, 1.0], [alpha, -1.0]]
    coeffs = {
        (a, b, x, y): C[x][y] * sign(a) * sign(b)
        for a in (1, 2)
        for b in (1, 2)
        for x in range(2)
        for y in range(2)
    }
    return BellFunctional(coeffs)


def bell_from_terms(terms, m: int = 2) -> BellFunctional:
    """Compile correlator terms (no Charlie slot) into a dichotomic Bell functional.

    Terms without a party's setting are spread evenly over its settings, as in
    the tripartite compiler.
    """
    coeffs = {(a, b, x, y): 0.0 for a in (1, 2) for b in (1, 2) for x in range(m) for y in range(m)}
    offset = 0.0
    for t in terms:
        if t.charlie_operator not in (None, "I"):
            raise ValueError("Bell terms cannot carry a Charlie operator")
        if t.alice_setting is None and t.bob_setting is None:
            offset += t.coefficient
            continue
        w = t.coefficient / (m if t.alice_setting is None else 1) / (m if t.bob_setting is None else 1)
        for a, b, x, y in coeffs:
            if t.alice_setting not in (None, x) or t.bob_setting not in (None, y):
                continue
            sa = sign(a) if t.alice_setting is not None else 1
            sb = sign(b) if t.bob_setting is not None else 1
            coeffs[(a, b, x, y)] += w * sa * sb
    return BellFunctional(coeffs, offset)


def _strategy_value(I: BellFunctional, lam, eta_ab=None) -> float:
    total = 0.0
    for (a, b, x, y), c in I.coefficients.items():
        if lam.alice.outcomes[x] == a and lam.bob.outcomes[y] == b:
            total += c / (eta_ab[x][y] if eta_ab is not None else 1.0)
    return total


def lhv_bound(I: BellFunctional, m: int | None = None, d: int | None = None) -> float:
    """Exact maximum over deterministic product strategies."""
    m = I.m if m is None else m
    d = max(I.outcomes, 2) if d is None else d
    return I.offset + max(_strategy_value(I, lam) for lam in enumerate_products(m, d))


def lhv_bound_conic(I: BellFunctional, m: int | None = None, d: int | None = None, **opts) -> float:
    m = I.m if m is None else m
    d = max(I.outcomes, 2) if d is None else d
    strategies = enumerate_products(m, d)
    prog = conic.ConicProgram("max", offset=I.offset)
    q = prog.add_block("nonneg", len(strategies))
    prog.set_objective(q, [_strategy_value(I, lam) for lam in strategies])
    prog.add_constraint({q: np.ones(len(strategies))}, 1.0)
    sol = conic.solve(prog, **opts)
    if sol.status != conic.OPTIMAL:
        raise RuntimeError(f"conic solver returned status {sol.status!r}")
    return sol.value


@dataclass
class PsLhvBound:
    value: float
    status: str
    solution: conic.ConicSolution | None
    program: conic.ConicProgram
    strategies: list
    metadata: dict = field(default_factory=dict)


def _ps_data(I: BellFunctional, eta: EfficiencyProfile2, d: int):
    m = eta.m
    for row in eta.eta_ab:
        if min(row) <= 0:
            raise ValueError("joint efficiencies must be positive for post-selection")
    strategies = enumerate_products(m, d, include_no_click=True)
    c = np.array([_strategy_value(I, lam, eta.eta_ab) for lam in strategies])
    ca = np.array([[lam.alice.outcomes[x] != NO_CLICK for x in range(m)] for lam in strategies], dtype=float)
    cb = np.array([[lam.bob.outcomes[y] != NO_CLICK for y in range(m)] for lam in strategies], dtype=float)
    rows = [np.ones(len(strategies))]
    rhs = [1.0]
    for x in range(m):
        for y in range(m):
            rows.append(ca[:, x] * cb[:, y])
            rhs.append(eta.eta_ab[x][y])
    for x in range(m):
        rows.append(ca[:, x])
        rhs.append(eta.eta_a[x])
    for y in range(m):
        rows.append(cb[:, y])
        rhs.append(eta.eta_b[y])
    return strategies, c, np.array(rows), np.array(rhs)


def ps_lhv_bound(I: BellFunctional, eta: EfficiencyProfile2, d: int | None = None, **opts) -> PsLhvBound:
    """Post-selected LHV bound as a scalar LP over a-priori product strategies."""
    d = max(I.outcomes, 2) if d is None else d
    for msg in eta.frechet_violations():
        warnings.warn(msg, stacklevel=2)
    strategies, c, A, b = _ps_data(I, eta, d)
    prog = conic.ConicProgram("max", offset=I.offset)
    q = prog.add_block("nonneg", len(strategies))
    prog.set_objective(q, c)
    for row, r in zip(A, b):
        prog.add_constraint({q: row}, r)
    sol = conic.solve(prog, **opts)
    if sol.status == conic.INFEASIBLE:
        return PsLhvBound(-np.inf, sol.status, sol, prog, strategies, {"message": "efficiencies inconsistent with any LHV model"})
    if sol.status != conic.OPTIMAL:
        raise RuntimeError(f"conic solver returned status {sol.status!r}")
    return PsLhvBound(sol.value, sol.status, sol, prog, strategies)


def ps_lhv_bound_linprog(I: BellFunctional, eta: EfficiencyProfile2, d: int | None = None) -> float:
    """Same LP solved by HiGHS; independent of the in-house solver."""
    d = max(I.outcomes, 2) if d is None else d
    _, c, A, b = _ps_data(I, eta, d)
    res = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 2:
        return -np.inf
    if res.status != 0:
        raise RuntimeError(res.message)
    return I.offset - res.fun


# ---------------------------------------------------------------------------
# quantum side


def behaviour_from_state(state: QuantumState, MA: MeasurementSet, MB: MeasurementSet) -> Behaviour:
    if len(state.dims) != 2:
        raise DimensionError("expected a bipartite state")
    if (MA.dim, MB.dim) != state.dims:
        raise DimensionError(f"measurements act on {(MA.dim, MB.dim)}, state on {state.dims}")
    table = {}
    for x, pa in enumerate(MA.elements):
        for y, pb in enumerate(MB.elements):
            for a, Ea in enumerate(pa, start=1):
                for b, Eb in enumerate(pb, start=1):
                    table[(a, b, x, y)] = float(np.real(np.trace(kron(Ea, Eb) @ state.rho)))
    return Behaviour(table)


def xz_measurements(angles) -> MeasurementSet:
    return MeasurementSet([qubit_measurement(t) for t in angles])


def _tilted_value(params: np.ndarray, alpha: float) -> float:
    # cos(phi)|00> + sin(phi)|11>, measurements in the XZ plane
    phi, a0, a1, b0, b1 = params
    s2 = np.sin(2 * phi)

    def E(a, b):
        return np.cos(a) * np.cos(b) + s2 * np.sin(a) * np.sin(b)

    return alpha * (E(a0, b0) + E(a1, b0)) + E(a0, b1) - E(a1, b1)


@dataclass
class QuantumOptimum:
    value: float
    phi: float
    alice_angles: tuple[float, float]
    bob_angles: tuple[float, float]
    metadata: dict = field(default_factory=dict)


def quantum_max_tilted(alpha: float, seed: int = 0, grid: int = 7, restarts: int = 8, product_only: bool = False) -> QuantumOptimum:
    """Coarse grid plus local refinement over pure two-qubit states and XZ-plane measurements.

    The reported value is recomputed from the optimal state and measurements
    via :func:`behaviour_from_state`.
    """
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    rng = np.random.default_rng(seed)
    axis = np.linspace(0, np.pi, grid, endpoint=False)
    phis = [0.0] if product_only else np.linspace(0, np.pi / 4, grid)
    starts = sorted(
        ((_tilted_value(np.array(p), alpha), p) for p in itertools.product(phis, axis, axis, axis, axis)),
        key=lambda t: -t[0],
    )[:restarts]
    starts = [np.array(p) for _, p in starts] + [rng.uniform(0, np.pi, 5) for _ in range(restarts)]
    best = None
    for p0 in starts:
        if product_only:
            p0 = p0.copy()
            p0[0] = 0.0
            res = minimize(lambda v: -_tilted_value(np.concatenate([[0.0], v]), alpha), p0[1:], method="BFGS")
            p = np.concatenate([[0.0], res.x])
        else:
            res = minimize(lambda v: -_tilted_value(v, alpha), p0, method="BFGS")
            p = res.x
        val = _tilted_value(p, alpha)
        if best is None or val > best[0]:
            best = (val, p)
    _, p = best
    state = partially_entangled(p[0])
    P = behaviour_from_state(state, xz_measurements(p[1:3]), xz_measurements(p[3:5]))
    value = tilted_chsh_quiet(alpha).evaluate(P)
    meta = {"seed": seed, "grid": grid, "restarts": restarts, "product_only": product_only}
    return QuantumOptimum(value, float(p[0]), (float(p[1]), float(p[2])), (float(p[3]), float(p[4])), meta)


def tilted_chsh_quiet(alpha: float) -> BellFunctional:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return tilted_chsh(alpha)


def tilted_closed_form(alpha: float) -> float:
    return 2 * np.sqrt(1 + alpha**2)


def critical_efficiency(alpha: float, preset: str, tol: float = 1e-4, seed: int = 0, lo: float = 0.01, hi: float = 1.0) -> float:
    """Efficiency at which the optimal quantum value of ``I_alpha`` meets the post-selected bound."""
    I = tilted_chsh_quiet(alpha)
    q = quantum_max_tilted(alpha, seed=seed).value

    def bound(e: float) -> float:
        return ps_lhv_bound(I, EfficiencyProfile2.preset(preset, e, 2)).value

    return bisect_crossing(bound, q, lo, hi, tol)
