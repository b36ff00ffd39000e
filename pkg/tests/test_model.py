import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrswitch.errors import NegativeRate, NonPositivePump, ValidationError
from kerrswitch.model import ModelParams, classify_regime, nontrivial_class, validate


def test_validate_accepts_hybrid_point():
    p = ModelParams(6, 3, math.sqrt(3) / 2, 0.5)
    assert validate(p) is p


def test_validate_rejects_zero_pump():
    with pytest.raises(NonPositivePump):
        validate(ModelParams(0, 0, 1, 0))


@pytest.mark.parametrize("eta,U", [(-0.1, 0.0), (1.0, -0.5)])
def test_validate_rejects_negative_rates(eta, U):
    with pytest.raises(NegativeRate):
        validate(ModelParams(6, 0, eta, U))


@pytest.mark.parametrize("bad", [math.nan, math.inf, "6", True])
def test_validate_rejects_non_numbers(bad):
    with pytest.raises(ValidationError):
        validate(ModelParams(bad, 0, 1, 0))


def test_vanishing_coupling_rejected():
    with pytest.raises(ValidationError):
        validate(ModelParams(6, 0, 0, 0))


def test_dissipative_limit_polar_form():
    p = ModelParams(6, 0, 1, 0)
    assert p.kappa2_phase == 0
    assert p.kappa2_modulus == 1


def test_pure_kerr_phase_is_right_angle():
    p = ModelParams(6, 0, 0, 2)
    assert p.kappa2_phase == pytest.approx(math.pi / 2)


@given(st.floats(0.01, 5), st.floats(0, math.pi / 2))
def test_polar_roundtrip(k, theta):
    p = ModelParams.from_polar(6, 1, k, theta)
    assert p.kappa2_modulus * math.cos(p.kappa2_phase) == pytest.approx(p.eta, abs=1e-14)
    assert p.kappa2_modulus * math.sin(p.kappa2_phase) == pytest.approx(p.U, abs=1e-14)


def test_regime_barrier():
    r = classify_regime(ModelParams(6, 3, 1, 0), 0.05)
    assert r.bistable and r.detuning_class == "barrier" and r.saddle_class == "saddle"


def test_regime_supercritical_center():
    r = classify_regime(ModelParams(6, 6.5, 1, 0))
    assert not r.bistable and r.saddle_class == "center"


def test_regime_near_critical():
    assert classify_regime(ModelParams(6, 5.9, 1, 0), 0.05).detuning_class == "near_critical"


def test_regime_small_detuning():
    assert classify_regime(ModelParams(6, 0.3, 1, 0)).detuning_class == "small"


@pytest.mark.parametrize("frac", [0.0, 1.0, -0.2])
def test_regime_fraction_bounds(frac):
    with pytest.raises(ValidationError):
        classify_regime(ModelParams(6, 3, 1, 0), frac)


@given(st.floats(-8, 8), st.floats(0.1, 2), st.floats(0, 2))
def test_classify_is_pure(delta, eta, U):
    p = ModelParams(6, delta, eta, U)
    assert classify_regime(p) == classify_regime(p)


def test_nontrivial_class_focus_at_hybrid_point():
    assert nontrivial_class(ModelParams(6, 3, math.sqrt(3) / 2, 0.5)) == "focus"


def test_nontrivial_class_node_without_kerr():
    assert nontrivial_class(ModelParams(6, 3, 1, 0)) == "node"
