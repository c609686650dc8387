import numpy as np
import pytest

from psbounds import multipartite as mp
from psbounds import scenarios as sc
from psbounds.steering import SteeringFunctional
from psbounds.strategies import enumerate_products

GHZ = mp.compile_correlators(mp.ghz_terms(), 3)
W = mp.compile_correlators(mp.w_terms(), 3)


def quantum_value(F, state):
    A = mp.tri_assemblage(state, sc.pauli_measurements(), sc.pauli_measurements())
    return F.offset + sum(np.trace(Fk @ A.members[k]).real for k, Fk in F.operators.items())


def test_compile_constant_and_single_terms():
    F = mp.compile_correlators([mp.CorrelatorTerm(-3.0730)], 3)
    assert F.offset == pytest.approx(-3.0730)
    F = mp.compile_correlators([mp.CorrelatorTerm(1.0, 2, None, "Z")], 3)
    # <A_2 Z> spread over Bob's three settings and summed over his outcomes
    Z = np.diag([1.0, -1.0])
    assert np.allclose(F.operators[(1, 1, 2, 0)], Z / 3)
    assert np.allclose(F.operators[(2, 2, 2, 1)], -Z / 3)
    assert np.allclose(F.operators[(1, 1, 0, 0)], 0)


def test_compile_rejects_bad_setting():
    with pytest.raises(ValueError):
        mp.compile_correlators([mp.CorrelatorTerm(1.0, 5, None, "Z")], 3)


def test_ghz_quantum_value():
    assert quantum_value(GHZ, sc.ghz_state()) == pytest.approx(3.4377, abs=0.01)
    # exact value of the printed coefficients
    assert quantum_value(GHZ, sc.ghz_state()) == pytest.approx(3.4375, abs=1e-12)


def test_w_quantum_value_of_printed_coefficients():
    # the reference value 2.6481 is not reproduced by the coefficients as printed
    assert quantum_value(W, sc.w_state()) == pytest.approx(3.6442, abs=1e-4)


def test_tri_ideal_bound_conic_matches_enumeration():
    assert mp.tri_lhs_bound(GHZ).value == pytest.approx(mp.tri_lhs_bound_by_enumeration(GHZ), abs=1e-7)
    assert mp.tri_lhs_bound_by_enumeration(GHZ) <= 1e-6


def test_ghz_unit_efficiency():
    b = mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.uncorrelated(1.0, 3))
    assert b.value <= 1e-6
    assert b.value == pytest.approx(mp.tri_lhs_bound(GHZ).value, abs=1e-6)


def test_ghz_post_selected_bracket():
    q = quantum_value(GHZ, sc.ghz_state())
    assert mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.uncorrelated(0.34, 3)).value < q
    assert mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.uncorrelated(0.32, 3)).value >= q - 1e-7
    # frozen from an independent cvxpy formulation
    assert mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.uncorrelated(0.34, 3)).value == pytest.approx(3.3928, abs=1e-4)


def test_perfectly_correlated_equals_ideal():
    ideal = mp.tri_lhs_bound(GHZ).value
    for e in (0.3, 0.7):
        b = mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.perfectly_correlated(e, 3))
        assert b.value == pytest.approx(ideal, abs=1e-6)


def test_infeasible_profile_reported():
    eta = mp.EfficiencyProfile2([[0.9] * 3] * 3, [0.1] * 3, [0.1] * 3)
    with pytest.warns(UserWarning):
        b = mp.tri_ps_lhs_bound(GHZ, eta)
    assert b.status == "infeasible" and b.value == -np.inf
    assert "inconsistent" in b.metadata["message"]


def test_zero_joint_efficiency_rejected():
    with pytest.raises(ValueError):
        mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2([[0.0] * 3] * 3, [0.5] * 3, [0.5] * 3))


def swap(F: SteeringFunctional) -> SteeringFunctional:
    return SteeringFunctional({(b, a, y, x): M for (a, b, x, y), M in F.operators.items()}, F.offset)


def test_swap_invariance():
    eta = mp.EfficiencyProfile2.one_sided(0.6, 3)
    b1 = mp.tri_ps_lhs_bound(GHZ, eta).value
    b2 = mp.tri_ps_lhs_bound(swap(GHZ), eta.swapped()).value
    assert b1 == pytest.approx(b2, abs=1e-6)


def test_monotone_uncorrelated():
    vals = [mp.tri_ps_lhs_bound(GHZ, mp.EfficiencyProfile2.uncorrelated(e, 3)).value for e in (0.4, 0.55, 0.7, 0.85, 1.0)]
    assert np.all(np.diff(vals) <= 1e-7)


def test_marginal_convention_irrelevant_on_lhs_data():
    # on non-signalling data <A_x O> does not depend on Bob's setting
    r = np.random.default_rng(3)
    members = {(a, b, x, y): np.zeros((2, 2), dtype=complex) for a in (1, 2) for b in (1, 2) for x in range(3) for y in range(3)}
    strategies = enumerate_products(3, 2)
    weights = r.dirichlet(np.ones(len(strategies)))
    for p, lam in zip(weights, strategies):
        v = r.standard_normal(2) + 1j * r.standard_normal(2)
        rho = np.outer(v, v.conj()) / np.vdot(v, v).real
        for x, a in enumerate(lam.alice.outcomes):
            for y, b in enumerate(lam.bob.outcomes):
                members[(a, b, x, y)] += p * rho
    term = mp.CorrelatorTerm(1.0, 1, None, "X")
    F = mp.compile_correlators([term], 3)
    compiled = sum(np.trace(Fk @ members[k]).real for k, Fk in F.operators.items())
    X = np.array([[0, 1], [1, 0]])
    for y in range(3):
        direct = sum(mp.sign(a) * np.trace(X @ members[(a, b, 1, y)]).real for a in (1, 2) for b in (1, 2))
        assert compiled == pytest.approx(direct, abs=1e-9)


def test_frechet_and_presets():
    assert mp.EfficiencyProfile2.uncorrelated(0.5, 2).frechet_violations() == []
    bad = mp.EfficiencyProfile2([[0.9, 0.9], [0.9, 0.9]], [0.5, 0.5], [0.5, 0.5])
    assert bad.frechet_violations()
    with pytest.raises(ValueError):
        mp.EfficiencyProfile2.preset("nope", 0.5, 2)
    with pytest.raises(ValueError):
        mp.EfficiencyProfile2([[1.2]], [1.0], [1.0])


def test_term_json_roundtrip(tmp_path):
    path = tmp_path / "terms.json"
    mp.dump_terms(mp.w_terms(), path)
    assert mp.load_terms(path) == mp.w_terms()
