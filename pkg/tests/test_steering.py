import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psbounds import scenarios as sc
from psbounds import steering as sb
from psbounds.linalg import eig_herm

C = 1 / np.sqrt(2)
ZX_BOUND = 1 + C
THREE_PAULI_BOUND = 1.5 + np.sqrt(3) / 2  # opnorm of a sum of three mutually unbiased qubit projectors


def pauli_projectors():
    return sc.pauli_measurements().as_projectors()


def test_evaluate_examples(zx_projectors):
    A = sc.assemblage_from_state(sc.max_entangled(2), sc.mub_measurements(2, 2).transposed())
    A_ps, _ = sc.post_select(sc.apply_loss(A, (0.8, 0.6)))
    F = sb.projective_functional(zx_projectors, (0.8, 0.6))
    assert sb.evaluate(F, A_ps) == pytest.approx(2 * 0.7, abs=1e-9)
    zero = sb.SteeringFunctional({(1, 0): np.zeros((2, 2))}, offset=-0.25)
    assert sb.evaluate(zero, A) == pytest.approx(-0.25)


@pytest.mark.parametrize("w", [0.3, 0.8, 1.0])
def test_evaluate_isotropic(w):
    M = sc.mub_measurements(2, 2)
    eta = (0.7, 0.5)
    A = sc.assemblage_from_state(sc.isotropic(2, w), M.transposed())
    A_ps, _ = sc.post_select(sc.apply_loss(A, eta))
    F = sb.projective_functional(M.as_projectors(), eta)
    assert sb.evaluate(F, A_ps) == pytest.approx(2 * 0.6 * (w + (1 - w) / 2), abs=1e-9)


def test_evaluate_missing_member():
    F = sb.SteeringFunctional({(1, 3): np.eye(2)})
    A = sb.Assemblage({(1, 0): np.eye(2) / 2, (2, 0): np.eye(2) / 2})
    with pytest.raises(KeyError):
        sb.evaluate(F, A)


def test_lhs_bound_examples(zx_projectors):
    F = sb.SteeringFunctional(zx_projectors)
    assert sb.lhs_bound(F).value == pytest.approx(ZX_BOUND, abs=1e-7)
    single = sb.SteeringFunctional({k: v for k, v in zx_projectors.items() if k[1] == 0})
    assert sb.lhs_bound(single).value == pytest.approx(1, abs=1e-7)
    assert sb.lhs_bound(sb.SteeringFunctional(pauli_projectors())).value == pytest.approx(THREE_PAULI_BOUND, abs=1e-7)


@given(st.integers(0, 10_000), st.integers(2, 3))
def test_lhs_bound_matches_enumeration(seed, m):
    r = np.random.default_rng(seed)
    ops = {}
    for x in range(m):
        for a in (1, 2):
            G = r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))
            ops[(a, x)] = (G + G.conj().T) / 2
    F = sb.SteeringFunctional(ops)
    assert sb.lhs_bound(F).value == pytest.approx(sb.lhs_bound_by_enumeration(F), abs=1e-7)


@given(st.integers(0, 10_000))
def test_lhs_soundness(seed):
    r = np.random.default_rng(seed)
    m, d = 2, 2
    ops = {}
    for x in range(m):
        for a in (1, 2):
            G = r.standard_normal((d, d)) + 1j * r.standard_normal((d, d))
            ops[(a, x)] = (G + G.conj().T) / 2
    F = sb.SteeringFunctional(ops)
    from psbounds.strategies import enumerate_strategies

    members = {(a, x): np.zeros((d, d), dtype=complex) for a in (1, 2) for x in range(m)}
    strategies = enumerate_strategies(m, 2)
    weights = r.dirichlet(np.ones(len(strategies)))
    for p, lam in zip(weights, strategies):
        v = r.standard_normal(d) + 1j * r.standard_normal(d)
        rho = np.outer(v, v.conj()) / (v.conj() @ v)
        for x, a in enumerate(lam.outcomes):
            members[(a, x)] += p * rho
    assert sb.evaluate(F, sb.Assemblage(members)) <= sb.lhs_bound(F).value + 1e-7


def test_ps_lhs_bound_examples(zx_projectors):
    F1 = sb.projective_functional(zx_projectors, (1, 1))
    assert sb.ps_lhs_bound(F1, (1, 1)).value == pytest.approx(ZX_BOUND, abs=1e-7)
    F5 = sb.projective_functional(zx_projectors, (0.5, 0.5))
    assert sb.ps_lhs_bound(F5, (0.5, 0.5)).value == pytest.approx(1.0, abs=1e-7)
    Fm1 = sb.SteeringFunctional({(a, 0): 0.5 * P for (a, x), P in zx_projectors.items() if x == 0})
    assert sb.ps_lhs_bound(Fm1, (0.5,)).value == pytest.approx(0.5, abs=1e-7)


def test_ps_lhs_bound_against_frozen_oracle(zx_projectors):
    # values from an independent cvxpy/SCS formulation of the same program
    F = sb.SteeringFunctional(zx_projectors)
    assert sb.ps_lhs_bound(F, (0.9, 0.6)).value == pytest.approx(1.8063265660, abs=1e-7)
    eta = (0.5, 0.4, 0.3)
    F3 = sb.projective_functional(pauli_projectors(), eta)
    assert sb.ps_lhs_bound(F3, eta).value == pytest.approx(1.1414213563, abs=1e-7)


def test_zero_efficiency_rejected(zx_projectors):
    with pytest.raises(ValueError):
        sb.ps_lhs_bound(sb.SteeringFunctional(zx_projectors), (0.0, 0.5))


def test_tiny_efficiency_warns(zx_projectors):
    with pytest.warns(UserWarning):
        sb.build_ps_program(sb.SteeringFunctional(zx_projectors), (1e-8, 0.5))


def test_dual_examples(zx_projectors):
    F = sb.projective_functional(zx_projectors, (1, 1))
    assert sb.ps_lhs_bound_dual(F, (1, 1)).value == pytest.approx(ZX_BOUND, abs=1e-7)
    F5 = sb.projective_functional(zx_projectors, (0.5, 0.5))
    dual = sb.ps_lhs_bound_dual(F5, (0.5, 0.5))
    assert dual.value == pytest.approx(1.0, abs=1e-7)
    F3 = sb.SteeringFunctional(pauli_projectors())
    assert sb.ps_lhs_bound_dual(F3, (1, 1, 1)).value == pytest.approx(THREE_PAULI_BOUND, abs=1e-7)


def test_hand_dual_point_is_feasible(zx_projectors):
    eta = (0.5, 0.5)
    F = sb.projective_functional(zx_projectors, eta)
    obj, worst = sb.check_dual_certificate(F, eta, 1 + C, [-C, -C])
    assert obj == pytest.approx(1.0, abs=1e-12)
    assert worst >= -1e-12


@given(
    st.lists(st.floats(0.05, 1.0), min_size=2, max_size=3),
    st.integers(0, 1000),
)
def test_hand_dual_point_gives_analytic_bound(etas, seed):
    m = len(etas)
    P = sc.random_measurements(2, m, np.random.default_rng(seed)).as_projectors()
    c = sb.cos_theta(P)
    F = sb.projective_functional(P, etas)
    obj, worst = sb.check_dual_certificate(F, etas, 1 + (m - 1) * c, [-c] * m)
    assert worst >= -1e-9
    assert obj == pytest.approx(sb.analytic_upper_bound(m, c, float(np.mean(etas))), abs=1e-12)


@given(
    st.integers(0, 10_000),
    st.sampled_from([(2, 2), (2, 3), (3, 2)]),
    st.floats(0.1, 1.0),
    st.floats(0.1, 1.0),
    st.floats(0.1, 1.0),
)
def test_analytic_domination_and_duality(seed, dm, e0, e1, e2):
    d, m = dm
    etas = (e0, e1, e2)[:m]
    P = sc.random_measurements(d, m, np.random.default_rng(seed)).as_projectors()
    F = sb.projective_functional(P, etas)
    primal = sb.ps_lhs_bound(F, etas)
    assert primal.value <= sb.analytic_upper_bound(m, sb.cos_theta(P), float(np.mean(etas))) + 1e-7
    if d == 2:
        assert sb.ps_lhs_bound_dual(F, etas).value == pytest.approx(primal.value, abs=1e-6)


def test_monotone_in_efficiency(zx_projectors):
    F = sb.SteeringFunctional(zx_projectors)
    grid = np.linspace(0.2, 1.0, 9)
    for x in range(2):
        vals = []
        for e in grid:
            eta = [0.7, 0.7]
            eta[x] = e
            vals.append(sb.ps_lhs_bound(F, eta).value)
        assert np.all(np.diff(vals) <= 1e-7)


def test_projective_functional_checks(zx_projectors):
    F = sb.projective_functional(zx_projectors, (0.5, 0.8))
    assert np.allclose(F.operators[(1, 0)], 0.5 * zx_projectors[(1, 0)])
    assert np.allclose(F.operators[(2, 1)], 0.8 * zx_projectors[(2, 1)])
    dup = {(1, 0): zx_projectors[(1, 0)], (1, 1): zx_projectors[(1, 0)]}
    with pytest.raises(sb.SharedProjectorError):
        sb.projective_functional(dup, (1, 1))
    with pytest.raises(ValueError):
        sb.projective_functional({(1, 0): np.eye(2)}, (1,))


def test_cos_theta(zx_projectors):
    assert sb.cos_theta(zx_projectors) == pytest.approx(C)
    assert sb.cos_theta(pauli_projectors()) == pytest.approx(C)
    with pytest.raises(ValueError):
        sb.cos_theta({k: v for k, v in zx_projectors.items() if k[1] == 0})


def test_analytic_bound_examples():
    assert sb.analytic_upper_bound(2, C, 1) == pytest.approx(ZX_BOUND)
    assert sb.analytic_upper_bound(3, C, 1) == pytest.approx(1 + 2 * C)
    assert sb.analytic_upper_bound(2, C, 0.5) == pytest.approx(1.0)


def test_critical_mean_eta():
    for m in (2, 3):
        assert sb.critical_mean_eta(m, C, 1.0, 2) == pytest.approx(1 / m)
    assert sb.critical_mean_eta(2, C, 0.95, 2) == pytest.approx(0.5 * (1 - C) / (0.975 - C))
    assert sb.critical_mean_eta(2, C, 0.5, 2) > 1
    with pytest.raises(sb.NoViolationError):
        sb.critical_mean_eta(2, C, 0.3, 2)


def test_lhs_member():
    M = sc.mub_measurements(2, 2).transposed()
    A = sc.assemblage_from_state(sc.max_entangled(2), M)
    A_hi, eta_hi = sc.post_select(sc.apply_loss(A, (0.9, 0.9)))
    assert sb.ps_lhs_member(A_hi, eta_hi).status == "infeasible"
    A_lo, eta_lo = sc.post_select(sc.apply_loss(A, (0.4, 0.4)))
    assert sb.ps_lhs_member(A_lo, eta_lo).status == "optimal"


def test_three_pauli_optimal_strategy_value():
    # opnorm of Pi_{+|X} + Pi_{+|Y} + Pi_{+|Z}
    P = pauli_projectors()
    assert eig_herm(P[(1, 0)] + P[(1, 1)] + P[(1, 2)])[0][0] == pytest.approx(THREE_PAULI_BOUND)


@pytest.mark.parametrize("eta", [(1.0, 1.0), (1.0, 0.6), (0.7, 0.6)])
def test_returned_certificate_checks(zx_projectors, eta):
    F = sb.SteeringFunctional(zx_projectors)
    dual = sb.ps_lhs_bound_dual(F, eta)
    obj, worst = sb.check_dual_certificate(F, eta, dual.certificate.mu, dual.certificate.nus)
    assert worst >= -1e-7
    assert obj == pytest.approx(sb.ps_lhs_bound(F, eta).value, abs=1e-6)
