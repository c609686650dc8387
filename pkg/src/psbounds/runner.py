"""Scenario files: parsing, bound computation and sweeps.

A scenario is a JSON object; see the README for the schema. Parsing is
strict: unknown names raise :class:`ScenarioError` with the offending path.
"""
from __future__ import annotations

import functools
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import bell, conic, extension, multipartite, scenarios, steering

VIOLATION_MARGIN = 1e-7
KINDS = ("steering", "tripartite", "bell")


class ScenarioError(ValueError):
    pass


class SolverFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# loading


def list_presets() -> list[str]:
    root = resources.files("psbounds") / "data"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = resources.files("psbounds") / "data" / f"{name}.json"
    if not path.is_file():
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return parse_text(path.read_text(), f"preset {name}")


def parse_text(text: str, source: str = "<scenario>") -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if 0 < exc.lineno <= len(text.splitlines()) else ""
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from None
    if not isinstance(obj, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    validate(obj)
    return obj


def load_file(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return parse_text(text, str(path))


def scenario_hash(scenario: dict) -> str:
    canon = json.dumps(scenario, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioError(f"{where}: missing key {key!r}")
    return obj[key]


def validate(sc: dict) -> None:
    kind = _need(sc, "kind", "scenario")
    if kind not in KINDS:
        raise ScenarioError(f"scenario.kind: expected one of {KINDS}, got {kind!r}")
    _need(sc, "functional", "scenario")
    _need(sc, "efficiency", "scenario")
    if kind != "bell" or sc.get("state", {}).get("name") != "optimal":
        _need(sc, "state", "scenario")
    sweep = sc.get("sweep")
    if sweep is not None:
        if sweep.get("parameter", "eta") != "eta":
            raise ScenarioError("scenario.sweep.parameter: only 'eta' can be swept")
        for key in ("start", "stop", "steps"):
            _need(sweep, key, "scenario.sweep")
        if int(sweep["steps"]) < 1:
            raise ScenarioError("scenario.sweep.steps: must be positive")


# ---------------------------------------------------------------------------
# builders


def build_state(spec: dict, where: str = "scenario.state") -> scenarios.QuantumState:
    name = _need(spec, "name", where)
    try:
        if name == "max_entangled":
            return scenarios.max_entangled(int(spec.get("d", 2)))
        if name == "isotropic":
            return scenarios.isotropic(int(spec.get("d", 2)), float(_need(spec, "w", where)))
        if name == "partially_entangled":
            return scenarios.partially_entangled(float(_need(spec, "phi", where)))
        if name == "ghz":
            return scenarios.ghz_state()
        if name == "w":
            return scenarios.w_state()
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    raise ScenarioError(f"{where}.name: unknown state {name!r}")


def build_measurements(spec: dict, seed: int, where: str) -> scenarios.MeasurementSet:
    name = _need(spec, "name", where)
    try:
        if name == "pauli":
            return scenarios.pauli_measurements()
        if name == "mub":
            return scenarios.mub_measurements(int(spec.get("d", 2)), int(_need(spec, "m", where)))
        if name == "random":
            rng = np.random.default_rng(seed)
            return scenarios.random_measurements(int(spec.get("d", 2)), int(_need(spec, "m", where)), rng)
        if name == "xz":
            return bell.xz_measurements([float(t) for t in _need(spec, "angles", where)])
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    raise ScenarioError(f"{where}.name: unknown measurement set {name!r}")


def _matrix(obj, where: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: bad matrix ({exc})") from None


def _terms(spec: dict, where: str) -> list[multipartite.CorrelatorTerm]:
    if "preset" in spec:
        presets = {"ghz": multipartite.ghz_terms, "w": multipartite.w_terms}
        if spec["preset"] not in presets:
            raise ScenarioError(f"{where}.preset: unknown term set {spec['preset']!r}")
        return presets[spec["preset"]]()
    try:
        return [multipartite.CorrelatorTerm.from_json(t) for t in _need(spec, "terms", where)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.terms: {exc}") from None


def steering_efficiency(spec: dict, eta_override: float | None, m: int) -> steering.EfficiencyProfile:
    if eta_override is not None:
        return steering.EfficiencyProfile.uniform(eta_override, m)
    eta = _need(spec, "eta", "scenario.efficiency")
    vals = [float(eta)] * m if np.isscalar(eta) else [float(e) for e in eta]
    if len(vals) != m:
        raise ScenarioError(f"scenario.efficiency.eta: {len(vals)} values for {m} settings")
    try:
        return steering.EfficiencyProfile(tuple(vals))
    except ValueError as exc:
        raise ScenarioError(f"scenario.efficiency: {exc}") from None


def pair_efficiency(spec: dict, eta_override: float | None, m: int) -> multipartite.EfficiencyProfile2:
    try:
        if "preset" in spec:
            eta = float(eta_override if eta_override is not None else _need(spec, "eta", "scenario.efficiency"))
            return multipartite.EfficiencyProfile2.preset(spec["preset"], eta, m)
        if eta_override is not None:
            raise ScenarioError("scenario.efficiency: sweeping needs a named preset")
        return multipartite.EfficiencyProfile2(
            _need(spec, "eta_ab", "scenario.efficiency"),
            _need(spec, "eta_a", "scenario.efficiency"),
            _need(spec, "eta_b", "scenario.efficiency"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"scenario.efficiency: {exc}") from None


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class Result:
    kind: str
    eta: float | list
    bound: float
    status: str
    gap: float | None = None
    quantum_value: float | None = None
    analytic_upper_bound: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool | None:
        if self.quantum_value is None or not np.isfinite(self.bound):
            return None if self.quantum_value is None else True
        return self.quantum_value > self.bound + VIOLATION_MARGIN


def _gap(sol: conic.ConicSolution | None) -> float | None:
    return None if sol is None else float(sol.gap)


def _opts(options: dict) -> dict:
    return {k: options[k] for k in ("tol", "max_iters") if k in options}


def _check_status(sol: conic.ConicSolution, allowed=(conic.OPTIMAL,)) -> None:
    if sol.status not in allowed:
        raise SolverFailure(f"solver status {sol.status}")


def run_steering(sc: dict, eta_value: float | None, options: dict) -> Result:
    seed = int(options.get("seed", 0))
    M = build_measurements(_need(sc, "measurements", "scenario"), seed, "scenario.measurements")
    eta = steering_efficiency(sc["efficiency"], eta_value, M.m)
    fspec = sc["functional"]
    ftype = _need(fspec, "type", "scenario.functional")
    projectors = M.as_projectors()
    if ftype == "projective":
        F = steering.projective_functional(projectors, eta)
    elif ftype == "operators":
        ops = {}
        for i, item in enumerate(_need(fspec, "operators", "scenario.functional")):
            where = f"scenario.functional.operators[{i}]"
            ops[(int(_need(item, "a", where)), int(_need(item, "x", where)))] = _matrix(item, where)
        F = steering.SteeringFunctional(ops, float(fspec.get("offset", 0.0)))
    else:
        raise ScenarioError(f"scenario.functional.type: unknown type {ftype!r} for steering")
    try:
        res = steering.ps_lhs_bound(F, eta, **_opts(options))
    except (RuntimeError, conic.NumericalFailure) as exc:
        raise SolverFailure(str(exc)) from None
    state = build_state(sc["state"])
    A = scenarios.assemblage_from_state(state, M.transposed())
    A_ps, _ = scenarios.post_select(scenarios.apply_loss(A, eta))
    q = steering.evaluate(F, A_ps)
    analytic = None
    if ftype == "projective" and M.m >= 2:
        analytic = steering.analytic_upper_bound(M.m, steering.cos_theta(projectors), eta.mean)
    return Result("steering", list(eta.etas), res.value, res.solution.status, _gap(res.solution), q, analytic)


def run_tripartite(sc: dict, eta_value: float | None, options: dict) -> Result:
    seed = int(options.get("seed", 0))
    fspec = sc["functional"]
    if _need(fspec, "type", "scenario.functional") != "correlators":
        raise ScenarioError("scenario.functional.type: tripartite scenarios take 'correlators'")
    m = int(fspec.get("m", 3))
    F = multipartite.compile_correlators(_terms(fspec, "scenario.functional"), m)
    eta = pair_efficiency(sc["efficiency"], eta_value, m)
    try:
        res = multipartite.tri_ps_lhs_bound(F, eta, **_opts(options))
    except (RuntimeError, conic.NumericalFailure) as exc:
        raise SolverFailure(str(exc)) from None
    _check_status(res.solution, (conic.OPTIMAL, conic.INFEASIBLE))
    meas = sc.get("measurements", {"alice": {"name": "pauli"}, "bob": {"name": "pauli"}})
    MA = build_measurements(_need(meas, "alice", "scenario.measurements"), seed, "scenario.measurements.alice")
    MB = build_measurements(_need(meas, "bob", "scenario.measurements"), seed + 1, "scenario.measurements.bob")
    A = multipartite.tri_assemblage(build_state(sc["state"]), MA, MB)
    # outcome-independent losses leave the post-selected assemblage equal to the ideal one
    q = F.offset + sum(float(np.real(np.trace(Fk @ A.members[k]))) for k, Fk in F.operators.items())
    extra = dict(res.metadata)
    reference = multipartite.REFERENCE_QUANTUM_VALUES.get(fspec.get("preset"))
    if reference is not None and abs(q - reference) > 0.01:
        extra["reference_quantum_value"] = reference
        extra["warning"] = f"quantum value {q:.4f} differs from the reference {reference} by more than 0.01"
    return Result("tripartite", eta_value if eta_value is not None else sc["efficiency"], res.value, res.solution.status, _gap(res.solution), q, None, extra)


@functools.lru_cache(maxsize=256)
def _tilted_quantum(alpha: float, seed: int) -> float:
    return bell.quantum_max_tilted(alpha, seed=seed).value


def _bell_quantum(sc: dict, I: bell.BellFunctional, alpha: float | None, seed: int) -> float:
    state_spec = sc.get("state", {"name": "optimal"})
    if state_spec.get("name") == "optimal":
        if alpha is None:
            raise ScenarioError("scenario.state: 'optimal' needs a tilted_chsh functional")
        return _tilted_quantum(float(alpha), seed)
    meas = _need(sc, "measurements", "scenario")
    MA = build_measurements(_need(meas, "alice", "scenario.measurements"), seed, "scenario.measurements.alice")
    MB = build_measurements(_need(meas, "bob", "scenario.measurements"), seed + 1, "scenario.measurements.bob")
    return I.evaluate(bell.behaviour_from_state(build_state(state_spec), MA, MB))


def _bell_functional(fspec: dict, alpha: float | None) -> bell.BellFunctional:
    ftype = _need(fspec, "type", "scenario.functional")
    if ftype == "tilted_chsh":
        return bell.tilted_chsh_quiet(float(alpha))
    if ftype == "correlators":
        return bell.bell_from_terms(_terms(fspec, "scenario.functional"), int(fspec.get("m", 2)))
    raise ScenarioError(f"scenario.functional.type: unknown type {ftype!r} for bell")


def _alpha_grid(fspec: dict) -> list[float] | None:
    if fspec.get("type") != "tilted_chsh":
        return None
    alpha = fspec.get("alpha", 1.0)
    if alpha == "optimize":
        lo, hi = fspec.get("alpha_range", [1.0, 1.5])
        return list(np.linspace(float(lo), float(hi), int(fspec.get("alpha_steps", 11))))
    return [float(alpha)]


def run_bell(sc: dict, eta_value: float | None, options: dict) -> Result:
    seed = int(options.get("seed", 0))
    fspec = sc["functional"]
    alphas = _alpha_grid(fspec) or [None]
    m = int(fspec.get("m", 2))
    eta = pair_efficiency(sc["efficiency"], eta_value, m)
    best = None
    for alpha in alphas:
        I = _bell_functional(fspec, alpha)
        try:
            res = bell.ps_lhv_bound(I, eta, **_opts(options))
        except (RuntimeError, conic.NumericalFailure) as exc:
            raise SolverFailure(str(exc)) from None
        q = _bell_quantum(sc, I, alpha, seed)
        cand = Result("bell", eta_value if eta_value is not None else sc["efficiency"], res.value, res.status, _gap(res.solution), q)
        if alpha is not None:
            cand.extra["alpha"] = float(alpha)
        if best is None or (cand.quantum_value - cand.bound) > (best.quantum_value - best.bound):
            best = cand
    return best


RUNNERS = {"steering": run_steering, "tripartite": run_tripartite, "bell": run_bell}


def run(sc: dict, eta_value: float | None = None, options: dict | None = None) -> Result:
    return RUNNERS[sc["kind"]](sc, eta_value, options or {})


def sweep_grid(sc: dict) -> np.ndarray:
    sw = sc.get("sweep")
    if sw is None:
        raise ScenarioError("scenario has no sweep section")
    return np.linspace(float(sw["start"]), float(sw["stop"]), int(sw["steps"]))


@dataclass
class Row:
    eta: float
    result: Result | None
    error: str | None = None


def sweep(sc: dict, options: dict | None = None) -> list[Row]:
    rows = []
    for e in sweep_grid(sc):
        try:
            rows.append(Row(float(e), run(sc, float(e), options)))
        except SolverFailure as exc:
            rows.append(Row(float(e), None, str(exc)))
    return rows


def crossing_bracket(rows: list[Row]) -> tuple[float, float] | None:
    """Adjacent sweep points between which the violation flag switches on."""
    for r0, r1 in zip(rows, rows[1:]):
        if r0.result and r1.result and not r0.result.violated and r1.result.violated:
            return r0.eta, r1.eta
    return None


# ---------------------------------------------------------------------------
# verification


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def verify(sc: dict, options: dict | None = None) -> list[Check]:
    options = options or {}
    checks: list[Check] = []
    kind = sc["kind"]
    opts = _opts(options)
    if kind == "steering":
        M = build_measurements(sc["measurements"], int(options.get("seed", 0)), "scenario.measurements")
        eta = steering_efficiency(sc["efficiency"], None, M.m)
        F = steering.projective_functional(M.as_projectors(), eta) if sc["functional"]["type"] == "projective" else None
        if F is None:
            F = steering.SteeringFunctional(
                {(int(i["a"]), int(i["x"])): _matrix(i, "operator") for i in sc["functional"]["operators"]},
                float(sc["functional"].get("offset", 0.0)),
            )
        red = extension.ideal_reduction_check(F, **opts)
        checks.append(Check("ideal-reduction", red.passed, f"difference {red.difference:.3e}, no-click weight {red.max_no_click_weight:.3e}"))
        res = steering.ps_lhs_bound(F, eta, **opts)
        rep = conic.verify_certificate(res.program, res.solution)
        checks.append(Check("certificate", rep.ok, rep.summary()))
        if M.m * eta.mean <= 1 + 1e-12 and sc["functional"]["type"] == "projective":
            state = build_state(sc["state"])
            sat = extension.saturation_check(state, M.transposed(), F, eta, **opts)
            err = extension.reproduction_error(state, M.transposed(), eta)
            checks.append(Check("oracle-reproduction", err <= 1e-12, f"max entry error {err:.3e}"))
            if abs(M.m * eta.mean - 1) <= 1e-12:
                checks.append(Check("oracle-saturation", sat.gap <= 1e-6, f"model {sat.model_value:.9f} vs bound {sat.bound:.9f}"))
    elif kind == "tripartite":
        fspec = sc["functional"]
        m = int(fspec.get("m", 3))
        F = multipartite.compile_correlators(_terms(fspec, "scenario.functional"), m)
        eta = pair_efficiency(sc["efficiency"], None, m)
        res = multipartite.tri_ps_lhs_bound(F, eta, **opts)
        if res.status == conic.OPTIMAL:
            rep = conic.verify_certificate(res.program, res.solution)
            checks.append(Check("certificate", rep.ok, rep.summary()))
        ideal = multipartite.tri_lhs_bound(F, m, **opts).value
        enum = multipartite.tri_lhs_bound_by_enumeration(F, m)
        checks.append(Check("ideal-enumeration", abs(ideal - enum) <= 1e-6, f"conic {ideal:.9f} vs enumeration {enum:.9f}"))
    else:
        fspec = sc["functional"]
        m = int(fspec.get("m", 2))
        eta = pair_efficiency(sc["efficiency"], None, m)
        for alpha in _alpha_grid(fspec) or [None]:
            I = _bell_functional(fspec, alpha)
            tag = "" if alpha is None else f"[alpha={alpha:.4g}]"
            res = bell.ps_lhv_bound(I, eta, **opts)
            lp = bell.ps_lhv_bound_linprog(I, eta)
            ok = (np.isinf(res.value) and np.isinf(lp)) or abs(res.value - lp) <= 1e-7
            checks.append(Check(f"lp-oracle{tag}", ok, f"conic {res.value:.9f} vs highs {lp:.9f}"))
            if res.solution is not None and res.status == conic.OPTIMAL:
                rep = conic.verify_certificate(res.program, res.solution)
                checks.append(Check(f"certificate{tag}", rep.ok, rep.summary()))
            ideal, ideal_c = bell.lhv_bound(I), bell.lhv_bound_conic(I, **opts)
            checks.append(Check(f"lhv-enumeration{tag}", abs(ideal - ideal_c) <= 1e-7, f"{ideal:.9f} vs {ideal_c:.9f}"))
    return checks

