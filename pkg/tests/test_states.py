import math

import numpy as np
import pytest

from qscsim.states import (
    DEFINITE_WEIGHT_TOL,
    Branch,
    InputKind,
    InputState,
    born_probability,
    make_input_state,
    state_fidelity,
)


def test_definite_basis_state():
    s = make_input_state(InputKind.DEFINITE, 1.0)
    assert s.a1 == 1.0
    assert s.a2 == 0.0
    assert s.kind is InputKind.DEFINITE


def test_equal_superposition_amplitudes():
    s = make_input_state(InputKind.SUPERPOSITION, 0.5)
    assert s.a1 == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert s.a2 == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert s.kind is InputKind.SUPERPOSITION


def test_out_of_range_weight_rejected():
    with pytest.raises(ValueError):
        make_input_state(InputKind.SUPERPOSITION, 1.2)
    with pytest.raises(ValueError):
        make_input_state(InputKind.SUPERPOSITION, -0.1)


def test_definite_requires_unit_weight():
    with pytest.raises(ValueError):
        make_input_state(InputKind.DEFINITE, 0.9)


def test_near_unit_weight_collapses_to_definite_kind():
    s = make_input_state(InputKind.SUPERPOSITION, 0.999999999999)
    assert s.kind is InputKind.DEFINITE
    assert make_input_state(InputKind.SUPERPOSITION, 1.0).kind is InputKind.DEFINITE
    just_outside = 1.0 - 2.0 * DEFINITE_WEIGHT_TOL
    assert make_input_state(InputKind.SUPERPOSITION, just_outside).kind is InputKind.SUPERPOSITION


def test_born_probability_examples():
    assert born_probability(make_input_state(InputKind.DEFINITE, 1.0)) == 1.0
    assert born_probability(make_input_state(InputKind.SUPERPOSITION, 0.5)) == pytest.approx(0.5, abs=1e-15)
    assert born_probability(make_input_state(InputKind.SUPERPOSITION, 0.3)) == pytest.approx(0.3, abs=1e-15)


def test_make_then_born_is_identity():
    rng = np.random.default_rng(2024)
    for p1 in rng.random(1000):
        s = make_input_state(InputKind.SUPERPOSITION, float(p1))
        assert abs(born_probability(s) - p1) <= 1e-12


def test_fidelity_examples():
    y1 = make_input_state(InputKind.DEFINITE, 1.0)
    y2 = make_input_state(InputKind.SUPERPOSITION, 0.0)
    sup = make_input_state(InputKind.SUPERPOSITION, 0.5)
    assert state_fidelity(y1, y1) == 1.0
    assert state_fidelity(y1, sup) == pytest.approx(0.5, abs=1e-12)
    assert state_fidelity(y1, y2) == 0.0


def test_fidelity_symmetric_and_bounded():
    rng = np.random.default_rng(7)
    states = [make_input_state(InputKind.SUPERPOSITION, float(p)) for p in rng.random(40)]
    for a in states[:20]:
        for b in states[20:]:
            f_ab = state_fidelity(a, b)
            assert f_ab == state_fidelity(b, a)
            assert 0.0 <= f_ab <= 1.0


def test_direct_construction_enforces_invariants():
    with pytest.raises(ValueError):
        InputState(a1=1.0, a2=0.5, kind=InputKind.SUPERPOSITION)  # not normalized
    with pytest.raises(ValueError):
        InputState(a1=-1.0, a2=0.0, kind=InputKind.DEFINITE)  # negative amplitude
    with pytest.raises(ValueError):
        InputState(a1=1.0, a2=0.0, kind=InputKind.SUPERPOSITION)  # kind mismatch
    with pytest.raises(ValueError):
        InputState(a1=math.sqrt(0.5), a2=math.sqrt(0.5), kind=InputKind.DEFINITE)


def test_branch_has_exactly_two_values():
    assert {b for b in Branch} == {Branch.B1, Branch.B2}
