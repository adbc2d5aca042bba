import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmedyn.channel import (XState, amplitudes, cavity_reduced, evolve_joint,
                            pair_unitary, reservoir_reduced, total_excitation)
from gmedyn.families import (MixedA, MixedC, NoisySC, PureSuperposition,
                             Werner, entanglement_margin)
from gmedyn.qstate import InvalidStateError, ket, partial_trace, pure_state, tensor

FAMILIES = [
    PureSuperposition(math.sqrt(0.1), math.sqrt(0.9)),
    Werner(0.45),
    MixedA(1.0),
    MixedC(0.6),
    NoisySC(0.999),
]


def test_amplitudes_endpoints():
    a0 = amplitudes(0.0)
    assert a0.xi == 1.0 and a0.chi == 0.0
    a = amplitudes(math.log(4))
    assert a.xi == pytest.approx(0.5, abs=1e-15)
    assert a.chi == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    late = amplitudes(50.0)
    assert late.xi <= 2e-11
    assert abs(late.chi - 1.0) <= 1e-12


def test_amplitudes_rejects_bad_input():
    with pytest.raises(ValueError):
        amplitudes(-0.1)
    with pytest.raises(ValueError):
        amplitudes(float("nan"))
    with pytest.raises(ValueError):
        amplitudes(float("inf"))


@given(kt=st.floats(0.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_amplitudes_normalization(kt):
    a = amplitudes(kt)
    assert abs(a.xi ** 2 + a.chi ** 2 - 1.0) <= 1e-12
    assert amplitudes(kt + 0.1).xi < a.xi or kt > 49  # monotone decay


def test_pair_unitary_is_unitary():
    for kt in (0.0, 0.3, 2.0, 50.0):
        u = pair_unitary(amplitudes(kt))
        assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-14)


def test_xstate_validation():
    with pytest.raises(InvalidStateError):
        XState(0.5, 0.5, 0.25, -0.25)
    with pytest.raises(InvalidStateError):
        XState(0.25, 0.25, 0.25, 0.25, rho14=0.3)  # exceeds sqrt(r11 r44)
    x = XState(0.5, 0.0, 0.0, 0.5, rho14=0.5)
    assert XState.from_matrix(x.to_matrix()) == x


def test_xstate_from_matrix_rejects_non_x_support():
    m = np.full((4, 4), 0.25, dtype=complex)
    with pytest.raises(InvalidStateError):
        XState.from_matrix(m)


def test_evolve_joint_at_zero_is_tensor_with_vacuum():
    for spec in FAMILIES:
        x = spec.build()
        joint = evolve_joint(x, 0.0)
        expected = tensor(x.to_density_matrix(), pure_state(ket("00"), (2, 2)))
        assert np.max(np.abs(joint.matrix - expected.matrix)) < 1e-14


def test_full_transfer_leaves_cavities_in_vacuum():
    for spec in FAMILIES:
        joint = evolve_joint(spec.build(), 50.0)
        cav = partial_trace(joint, keep={0, 1})
        vac = np.zeros((4, 4))
        vac[0, 0] = 1.0
        assert np.max(np.abs(cav.matrix - vac)) < 1e-10


def test_full_transfer_hands_initial_state_to_reservoirs():
    for spec in FAMILIES:
        x = spec.build()
        res = reservoir_reduced(x, 50.0)
        assert np.max(np.abs(res.to_matrix() - x.to_matrix())) < 1e-10


def test_reservoirs_start_in_vacuum():
    for spec in FAMILIES:
        res = reservoir_reduced(spec.build(), 0.0)
        assert res.rho11 == pytest.approx(1.0, abs=1e-15)
        assert abs(res.rho14) < 1e-15


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.text())
def test_joint_evolution_matches_closed_forms(spec):
    x = spec.build()
    for i in range(20):
        kt = 20.0 * i / 19
        joint = evolve_joint(x, kt)
        cav = partial_trace(joint, keep={0, 1})
        res = partial_trace(joint, keep={2, 3})
        assert np.max(np.abs(cav.matrix - cavity_reduced(x, kt).to_matrix())) < 1e-10
        assert np.max(np.abs(res.matrix - reservoir_reduced(x, kt).to_matrix())) < 1e-10


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.text())
def test_purity_and_excitation_conserved(spec):
    x = spec.build()
    p0 = evolve_joint(x, 0.0).purity()
    n0 = total_excitation(evolve_joint(x, 0.0))
    for kt in (0.1, 0.5, 1.0, 2.5, 7.0, 20.0):
        joint = evolve_joint(x, kt)
        assert joint.purity() == pytest.approx(p0, abs=1e-10)
        assert total_excitation(joint) == pytest.approx(n0, abs=1e-10)


def test_pure_state_closed_form_coefficients():
    # alpha|00> + beta|11>: rho14(t) = alpha beta xi^2, rho44(t) = beta^2 xi^4
    alpha, beta = math.sqrt(0.3), math.sqrt(0.7)
    x = PureSuperposition(alpha, beta).build()
    for kt in (0.2, 0.9, 3.0):
        a = amplitudes(kt)
        out = cavity_reduced(x, kt)
        assert out.rho14 == pytest.approx(alpha * beta * a.xi ** 2, abs=1e-14)
        assert out.rho44 == pytest.approx(beta ** 2 * a.xi ** 4, abs=1e-14)


def test_werner_death_time_matches_margin_flip():
    p = 0.6
    x = Werner(p).build()
    t_death = math.log((1 + p) / (2 * (1 - p)))
    assert entanglement_margin(cavity_reduced(x, t_death - 1e-6)) > 0
    assert entanglement_margin(cavity_reduced(x, t_death + 1e-6)) < 0


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.text())
def test_reservoir_cavity_duality(spec):
    # reservoir_reduced(kt) equals cavity_reduced(kt') with xi^2(kt') = chi^2(kt)
    x = spec.build()
    for kt in (0.3, 0.7, 1.5, 3.0):
        chi2 = amplitudes(kt).chi ** 2
        # xi^2(kt') = chi^2(kt)  =>  e^{-kt'} = chi^2  =>  kt' = -log(chi^2)
        kt_dual = -math.log(chi2)
        res = reservoir_reduced(x, kt)
        cav = cavity_reduced(x, kt_dual)
        assert np.max(np.abs(res.to_matrix() - cav.to_matrix())) < 1e-10


def test_trace_and_psd_along_evolution():
    x = Werner(0.8).build()
    for kt in np.linspace(0, 20, 15):
        joint = evolve_joint(x, float(kt))  # construction validates PSD/trace
        assert abs(np.trace(joint.matrix) - 1) < 1e-12
