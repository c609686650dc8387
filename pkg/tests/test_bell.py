import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psbounds import bell
from psbounds import scenarios as sc
from psbounds.multipartite import CorrelatorTerm, EfficiencyProfile2

CHSH = bell.tilted_chsh(1.0)


def test_chsh_coefficients():
    assert CHSH.coefficients[(1, 1, 0, 0)] == 1 and CHSH.coefficients[(1, 2, 0, 0)] == -1
    assert CHSH.coefficients[(1, 1, 1, 1)] == -1
    plus = bell.Behaviour({(a, b, x, y): float(a == 1 and b == 1) for a in (1, 2) for b in (1, 2) for x in (0, 1) for y in (0, 1)})
    assert CHSH.evaluate(plus) == pytest.approx(2)


def test_alpha_range_warning():
    with pytest.warns(UserWarning):
        bell.tilted_chsh(2.0)


@pytest.mark.parametrize("alpha", [1.0, 1.2, 1.5])
def test_lhv_bound(alpha):
    I = bell.tilted_chsh(alpha)
    assert bell.lhv_bound(I) == pytest.approx(2 * alpha)
    assert bell.lhv_bound_conic(I) == pytest.approx(2 * alpha, abs=1e-7)


def test_offset_only():
    I = bell.BellFunctional({(1, 1, 0, 0): 0.0}, offset=0.7)
    assert bell.lhv_bound(I) == pytest.approx(0.7)


def test_ps_unit_efficiency():
    b = bell.ps_lhv_bound(CHSH, EfficiencyProfile2.uncorrelated(1.0, 2))
    assert b.value == pytest.approx(2, abs=1e-8)


@pytest.mark.parametrize("eta", [0.1, 0.3, 0.5, 0.8, 1.0])
def test_perfectly_correlated_coincides_with_ideal(eta):
    for alpha in (1.0, 1.3):
        I = bell.tilted_chsh(alpha)
        b = bell.ps_lhv_bound(I, EfficiencyProfile2.perfectly_correlated(eta, 2))
        assert b.value - bell.lhv_bound(I) <= 1e-7
        assert b.value == pytest.approx(2 * alpha, abs=1e-7)


@given(st.floats(1.0, 1.5), st.floats(0.2, 1.0), st.sampled_from(["uncorrelated", "one-sided", "perfectly-correlated"]))
def test_conic_matches_highs(alpha, eta, preset):
    I = bell.tilted_chsh(alpha)
    prof = EfficiencyProfile2.preset(preset, eta, 2)
    ours = bell.ps_lhv_bound(I, prof)
    assert ours.value == pytest.approx(bell.ps_lhv_bound_linprog(I, prof), abs=1e-7)
    assert ours.value >= bell.lhv_bound(I) - 1e-8


def test_infeasible_triple():
    prof = EfficiencyProfile2([[0.9, 0.9], [0.9, 0.9]], [0.2, 0.2], [0.2, 0.2])
    with pytest.warns(UserWarning):
        b = bell.ps_lhv_bound(CHSH, prof)
    assert b.status == "infeasible" and b.value == -np.inf
    assert bell.ps_lhv_bound_linprog(CHSH, prof) == -np.inf


def test_behaviour_from_state_chsh_optimal():
    MA = bell.xz_measurements([0.0, np.pi / 2])
    MB = bell.xz_measurements([np.pi / 4, -np.pi / 4])
    P = bell.behaviour_from_state(sc.max_entangled(2), MA, MB)
    assert CHSH.evaluate(P) == pytest.approx(2 * np.sqrt(2), abs=1e-9)
    for x in range(2):
        for y in range(2):
            assert P.normalisation(x, y) == pytest.approx(1)


def test_behaviour_product_factorises():
    rA = np.diag([0.7, 0.3]).astype(complex)
    rB = np.full((2, 2), 0.5, dtype=complex)
    MA = MB = bell.xz_measurements([0.3, 1.1])
    P = bell.behaviour_from_state(sc.product_state(rA, rB), MA, MB)
    for (a, b, x, y), p in P.table.items():
        pa = np.trace(MA.element(a, x) @ rA).real
        pb = np.trace(MB.element(b, y) @ rB).real
        assert p == pytest.approx(pa * pb)


def test_behaviour_dimension_mismatch():
    with pytest.raises(Exception):
        bell.behaviour_from_state(sc.max_entangled(3), bell.xz_measurements([0.0]), bell.xz_measurements([0.0]))


@pytest.mark.parametrize("alpha", [1.0, 1.25, 1.5])
def test_quantum_max_tilted(alpha):
    q = bell.quantum_max_tilted(alpha, seed=1)
    assert q.value == pytest.approx(bell.tilted_closed_form(alpha), abs=1e-3)


def test_quantum_max_product_only_is_local():
    for alpha in (1.0, 1.4):
        q = bell.quantum_max_tilted(alpha, product_only=True)
        assert q.value == pytest.approx(bell.lhv_bound(bell.tilted_chsh(alpha)), abs=1e-6)


def test_quantum_max_reproducible():
    assert bell.quantum_max_tilted(1.3, seed=5).value == bell.quantum_max_tilted(1.3, seed=5).value


def test_bell_from_terms_matches_tilted():
    alpha = 1.2
    terms = [
        CorrelatorTerm(alpha, 0, 0),
        CorrelatorTerm(alpha, 1, 0),
        CorrelatorTerm(1.0, 0, 1),
        CorrelatorTerm(-1.0, 1, 1),
    ]
    I = bell.bell_from_terms(terms)
    J = bell.tilted_chsh(alpha)
    assert all(I.coefficients[k] == pytest.approx(J.coefficients[k]) for k in J.coefficients)
    with pytest.raises(ValueError):
        bell.bell_from_terms([CorrelatorTerm(1.0, 0, 0, "Z")])
