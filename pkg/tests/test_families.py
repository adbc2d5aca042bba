import math

import numpy as np
import pytest

from gmedyn.channel import cavity_reduced
from gmedyn.families import (MixedA, MixedC, NoisySC, PureSuperposition,
                             SeparableInitialStateError, Werner,
                             is_entangled_xstate, numeric_event_times,
                             parse_family)
from gmedyn.qstate import ket


def test_build_pure_limit_states():
    x = PureSuperposition(1.0, 0.0).build()
    expected = np.outer(ket("00"), ket("00"))
    assert np.max(np.abs(x.to_matrix() - expected)) < 1e-15


def test_build_werner_bell_limit():
    x = Werner(1.0).build()
    assert x.rho11 == x.rho44 == 0.5
    assert x.rho14 == 0.5
    assert x.rho22 == x.rho33 == 0.0


def test_build_mixeda_a1():
    x = MixedA(1.0).build()
    assert x.rho22 == x.rho33 == pytest.approx(1 / 3)
    assert x.rho23 == pytest.approx(1 / 3)
    assert x.rho44 == pytest.approx(1 / 3)
    assert x.rho11 == 0.0


def test_noisy_f1_reduces_to_pure():
    noisy = NoisySC(1.0).build()
    pure = PureSuperposition(1 / math.sqrt(26), 5 / math.sqrt(26)).build()
    assert np.max(np.abs(noisy.to_matrix() - pure.to_matrix())) < 1e-14


EXPECTED_TIMES = [
    (PureSuperposition(math.sqrt(0.1), 3 * math.sqrt(0.1)),
     math.log(1.5), math.log(3.0)),
    (PureSuperposition(1 / math.sqrt(26), 5 / math.sqrt(26)),
     math.log(1.25), math.log(5.0)),
    (Werner(0.45), math.log(1.45 / 1.10), math.log(1.45 / 0.35)),
    (MixedA(1.0), math.log((2 + math.sqrt(2)) / 2), math.log(1 + math.sqrt(2))),
    (MixedC(0.6), math.log(1.75), math.log(1.4 / 0.6)),
]


@pytest.mark.parametrize("spec,t_esd,t_esb", EXPECTED_TIMES,
                         ids=lambda v: v.text() if hasattr(v, "text") else "")
def test_event_time_closed_forms(spec, t_esd, t_esb):
    times = spec.event_times()
    assert times.t_esd == pytest.approx(t_esd, abs=1e-12)
    assert times.t_esb == pytest.approx(t_esb, abs=1e-12)


def test_mixeda_a1_reference_values():
    times = MixedA(1.0).event_times()
    assert times.t_esd == pytest.approx(0.5348, abs=2e-4)
    assert times.t_esb == pytest.approx(0.8814, abs=1e-4)


def test_family1_ordering_trichotomy():
    # equal times iff beta = 2 alpha; birth earlier iff beta < 2 alpha
    alpha = 1 / math.sqrt(5)
    spec = PureSuperposition(alpha, 2 * alpha)
    t = spec.event_times()
    assert t.t_esd == pytest.approx(t.t_esb, abs=1e-12)
    earlier = PureSuperposition(math.sqrt(0.4), math.sqrt(0.6)).event_times()
    assert earlier.t_esb < earlier.t_esd
    later = PureSuperposition(math.sqrt(0.05), math.sqrt(0.95)).event_times()
    assert later.t_esb > later.t_esd


def test_werner_trichotomy_about_three_fifths():
    t = Werner(0.6).event_times()
    assert t.t_esd == pytest.approx(t.t_esb, abs=1e-12)
    assert Werner(0.5).event_times().t_esb > Werner(0.5).event_times().t_esd
    assert Werner(0.7).event_times().t_esb < Werner(0.7).event_times().t_esd


def test_mixeda_trichotomy_about_two_thirds():
    t = MixedA(2 / 3).event_times()
    assert t.t_esd == pytest.approx(t.t_esb, abs=1e-12)
    assert MixedA(0.5).event_times().t_esd > MixedA(0.5).event_times().t_esb
    assert MixedA(0.9).event_times().t_esd < MixedA(0.9).event_times().t_esb


def test_mixedc_equal_times_at_two_thirds():
    t = MixedC(2 / 3).event_times()
    assert t.t_esd == pytest.approx(math.log(2), abs=1e-12)
    assert t.t_esb == pytest.approx(math.log(2), abs=1e-12)


def test_asymptotic_and_immediate_cases():
    assert PureSuperposition(math.sqrt(2 / 3), math.sqrt(1 / 3)).event_times() \
        .t_esd is None
    assert PureSuperposition(math.sqrt(2 / 3), math.sqrt(1 / 3)).event_times() \
        .t_esb == 0.0
    assert Werner(1.0).event_times().t_esd is None
    assert Werner(1.0).event_times().t_esb == 0.0
    assert MixedC(1.0).event_times().t_esd is None
    assert MixedA(0.2).event_times().t_esd is None
    assert MixedA(0.2).event_times().t_esb == 0.0
    assert MixedA(1 / 3).event_times().t_esb == pytest.approx(0.0, abs=1e-12)


def test_separable_initial_states_rejected():
    for spec in (Werner(0.3), Werner(1 / 3), NoisySC(13 / 23), NoisySC(0.4),
                 PureSuperposition(1.0, 0.0), PureSuperposition(0.0, 1.0),
                 MixedC(0.0)):
        with pytest.raises(SeparableInitialStateError):
            spec.event_times()


def test_parameter_range_validation():
    with pytest.raises(ValueError):
        Werner(1.2)
    with pytest.raises(ValueError):
        MixedA(-0.1)
    with pytest.raises(ValueError):
        PureSuperposition(0.9, 0.9)


@pytest.mark.parametrize("spec", [
    PureSuperposition(math.sqrt(0.1), 3 * math.sqrt(0.1)),
    PureSuperposition(math.sqrt(0.45), math.sqrt(0.55)),
    PureSuperposition(1 / math.sqrt(26), 5 / math.sqrt(26)),
    Werner(0.4), Werner(0.45), Werner(0.75), Werner(0.95),
    MixedA(0.4), MixedA(0.6), MixedA(1.0),
    MixedC(0.2), MixedC(0.6), MixedC(0.9),
    NoisySC(0.6), NoisySC(0.9), NoisySC(0.999),
], ids=lambda s: s.text())
def test_numeric_events_match_analytic(spec):
    analytic = spec.event_times()
    numeric = numeric_event_times(spec)
    if analytic.t_esd is None:
        assert numeric.t_esd is None
    else:
        assert numeric.t_esd == pytest.approx(analytic.t_esd, abs=1e-6)
    assert numeric.t_esb == pytest.approx(analytic.t_esb, abs=1e-6)


def test_numeric_detects_asymptotic_decay_as_none():
    numeric = numeric_event_times(PureSuperposition(math.sqrt(0.7), math.sqrt(0.3)))
    assert numeric.t_esd is None
    assert numeric.t_esb == 0.0


def test_entanglement_criterion_examples():
    assert not is_entangled_xstate(PureSuperposition(1.0, 0.0).build())
    assert is_entangled_xstate(Werner(1.0).build())
    spec = PureSuperposition(math.sqrt(0.1), 3 * math.sqrt(0.1))
    x = spec.build()
    t_death = spec.event_times().t_esd
    assert not is_entangled_xstate(cavity_reduced(x, t_death + 0.01))
    assert is_entangled_xstate(cavity_reduced(x, t_death - 0.01))


def test_parse_family_roundtrip():
    for text in ("pure:alpha2=0.1", "werner:p=0.45", "mixeda:a=0.5",
                 "mixedc:c=0.6", "noisysc:f=0.999"):
        spec = parse_family(text)
        assert parse_family(spec.text()) == spec


def test_parse_family_rejects_garbage():
    for bad in ("", "pure", "pure:beta=0.1", "nope:x=1", "werner:p=two",
                "pure:alpha2=1.5"):
        with pytest.raises(ValueError):
            parse_family(bad)
