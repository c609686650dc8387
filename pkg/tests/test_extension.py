import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psbounds import extension as ex
from psbounds import scenarios as sc
from psbounds import steering as sb
from psbounds.linalg import DimensionError

BELL = sc.max_entangled(2)
ZX = sc.mub_measurements(2, 2)


@pytest.mark.parametrize("eta", [(0.5, 0.5), (0.6, 0.4), (0.3, 0.3)])
def test_reproduces_lossy_assemblage(eta):
    assert ex.reproduction_error(BELL, ZX.transposed(), eta) <= 1e-12


def test_all_flag_weight():
    model = ex.build_extension_model(BELL, ZX.transposed(), (0.3, 0.3))
    p, rho = model.hidden_states[(0, 0)]
    assert p == pytest.approx(1 - 2 * 0.3)
    assert np.allclose(rho, np.eye(2) / 2)


def test_no_click_traces_match_target():
    eta = (0.7, 0.2, 0.1)
    A = ex.induced_assemblage(ex.build_extension_model(BELL, sc.pauli_measurements().transposed(), eta))
    for x, e in enumerate(eta):
        assert np.trace(A.members[(0, x)]).real == pytest.approx(1 - e, abs=1e-12)


def test_rejects_high_efficiency():
    with pytest.raises(ValueError):
        ex.build_extension_model(BELL, ZX, (0.7, 0.7))
    with pytest.raises(DimensionError):
        ex.build_extension_model(sc.max_entangled(3), ZX, (0.5, 0.5))


def test_induced_uniform_and_deterministic():
    rho = np.diag([0.3, 0.7]).astype(complex)
    keys = [(a, b) for a in range(3) for b in range(3)]
    uniform = ex.ExtensionModel({k: (1 / 9, rho) for k in keys}, m=2, outcomes=2, d=2)
    A = ex.induced_assemblage(uniform)
    for S in A.members.values():
        assert np.allclose(S, rho / 3)
    det = ex.ExtensionModel({k: ((1.0, rho) if k == (2, 1) else (0.0, None)) for k in keys}, m=2, outcomes=2, d=2)
    A = ex.induced_assemblage(det)
    assert np.allclose(A.members[(2, 0)], rho) and np.allclose(A.members[(1, 1)], rho)
    assert np.allclose(A.members[(1, 0)], 0)


@pytest.mark.parametrize("eta", [(0.5, 0.5), (0.6, 0.4)])
def test_saturates_sdp_at_threshold(eta):
    F = sb.projective_functional(ZX.as_projectors(), eta)
    rep = ex.saturation_check(BELL, ZX.transposed(), F, eta)
    assert rep.model_value == pytest.approx(1.0, abs=1e-12)
    assert rep.gap <= 1e-6


@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_induced_is_post_selected_member(seed, frac):
    r = np.random.default_rng(seed)
    eta = (frac * 0.5 + 0.02, (1 - frac) * 0.5)
    M = sc.random_measurements(2, 2, r)
    A_ps, prof = sc.post_select(ex.induced_assemblage(ex.build_extension_model(BELL, M, eta)))
    assert sb.ps_lhs_member(A_ps, prof).status == "optimal"


def test_ideal_reduction_examples():
    for F in (sb.SteeringFunctional(ZX.as_projectors()), sb.SteeringFunctional(sc.pauli_measurements().as_projectors())):
        rep = ex.ideal_reduction_check(F)
        assert rep.passed, rep


@given(st.integers(0, 10_000))
def test_ideal_reduction_random(seed):
    r = np.random.default_rng(seed)
    ops = {}
    for x in range(2):
        for a in (1, 2):
            G = r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))
            ops[(a, x)] = (G + G.conj().T) / 2
    assert ex.ideal_reduction_check(sb.SteeringFunctional(ops)).difference <= 1e-6
