import math

import numpy as np
import pytest

from gmedyn.channel import amplitudes, cavity_reduced, reservoir_reduced
from gmedyn.families import (PureSuperposition, Werner, is_entangled_xstate,
                             parse_family)
from gmedyn.negativity import negativity, negativity_curve, xstate_negativity
from gmedyn.qstate import Bipartition, ket, pure_state, tensor
from helpers import random_density_matrix, random_xstate

CUT = Bipartition(2, frozenset({0}))


def test_product_state_has_zero_negativity():
    rng = np.random.default_rng(0)
    rho = tensor(random_density_matrix(rng, 2), random_density_matrix(rng, 2))
    assert negativity(rho, CUT) == 0.0


def test_bell_state_negativity_half():
    bell = pure_state((ket("00") + ket("11")) / np.sqrt(2), (2, 2))
    assert negativity(bell, CUT) == pytest.approx(0.5, abs=1e-12)


def test_initial_cavity_negativity_for_one_tenth_split():
    spec = PureSuperposition(math.sqrt(0.1), 3 * math.sqrt(0.1))
    assert xstate_negativity(spec.build()) == pytest.approx(0.3, abs=1e-15)


def test_werner_closed_form():
    for p in (0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0):
        expected = max(0.0, (3 * p - 1) / 4)
        assert xstate_negativity(Werner(p).build()) == pytest.approx(
            expected, abs=1e-14)


def test_pure_family_closed_form():
    for a2 in (0.1, 0.25, 0.5, 0.9):
        alpha, beta = math.sqrt(a2), math.sqrt(1 - a2)
        spec = PureSuperposition(alpha, beta)
        assert xstate_negativity(spec.build()) == pytest.approx(
            alpha * beta, abs=1e-14)


def test_oracle_equivalence_on_random_xstates():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        x = random_xstate(rng)
        direct = negativity(x.to_density_matrix(), CUT)
        closed = xstate_negativity(x)
        assert abs(direct - closed) <= 1e-10


def test_zero_crossing_matches_entanglement_criterion():
    rng = np.random.default_rng(7)
    for _ in range(500):
        x = random_xstate(rng)
        ent = is_entangled_xstate(x)
        neg = xstate_negativity(x)
        if ent:
            assert neg > 0
        else:
            assert neg <= 1e-9


def test_two_qubit_bound():
    rng = np.random.default_rng(3)
    for _ in range(300):
        x = random_xstate(rng)
        assert xstate_negativity(x) <= 0.5 + 1e-12


def test_transfer_duality():
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = random_xstate(rng)
        for kt in (0.2, 0.8, 2.0):
            chi2 = amplitudes(kt).chi ** 2
            kt_dual = -math.log(chi2)
            left = xstate_negativity(reservoir_reduced(x, kt))
            right = xstate_negativity(cavity_reduced(x, kt_dual))
            assert left == pytest.approx(right, abs=1e-12)


def test_curve_for_asymptotic_family():
    spec = parse_family("pure:alpha2=0.666667")
    grid = np.linspace(0.0, 8.0, 33)
    rows = negativity_curve(spec, grid)
    assert rows[0][1] == pytest.approx(math.sqrt(2) / 3, abs=1e-6)
    assert rows[0][2] == 0.0
    for kt, e_cc, e_rr in rows[1:]:
        assert e_cc > 0.0  # asymptotic decay, never an exact zero
        assert e_rr > 0.0  # no sudden appearance: entangled immediately
    assert rows[-1][1] < 1e-3


def test_curve_reservoirs_start_unentangled():
    for text in ("pure:alpha2=0.1", "werner:p=0.8", "mixeda:a=1"):
        rows = negativity_curve(parse_family(text), [0.0])
        assert rows[0][2] == 0.0
