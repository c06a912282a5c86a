import math
import warnings

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spatial_homodyne.beam_state import (BeamState, FirstOrderWarning, QuadratureNoise, apply_loss,
                                         apply_loss_chain, encode_displacement, encode_tilt,
                                         lossy_variance, pzt_modulation, set_noise_mode_squeezing)
from spatial_homodyne.detection import LocalOscillator, homodyne_expectation
from spatial_homodyne.hg_modes import Basis

BASIS = Basis(106e-6, 1.064e-6)
N = 9.1e9


@pytest.fixture
def beam():
    return BeamState(N, BASIS)


def test_displacement_zero_is_identity(beam):
    assert encode_displacement(beam, 0.0) == beam


def test_displacement_experiment_value(beam):
    s = encode_displacement(beam, 0.6e-9)
    assert s.coefficient(1).real == pytest.approx(5.660377358490566e-06, rel=1e-12)
    assert s.coefficient(1).imag == 0
    assert s.coefficient(0) == 1


def test_displacement_at_qnl_gives_half_over_root_n(beam):
    d_qnl = BASIS.waist / (2 * math.sqrt(N))
    s = encode_displacement(beam, d_qnl)
    assert s.coefficient(1).real == pytest.approx(1 / (2 * math.sqrt(N)), rel=1e-14)
    assert homodyne_expectation(s, LocalOscillator()).snr_power == pytest.approx(1.0, rel=1e-12)


def test_tilt_experiment_value(beam):
    assert encode_tilt(beam, 0.0) == beam
    s = encode_tilt(beam, 1e-7)
    assert s.coefficient(1).imag == pytest.approx(3.129782154892087e-05, rel=1e-12)
    assert s.coefficient(1).real == 0


def test_encoders_commute(beam):
    a = encode_tilt(encode_displacement(beam, 3e-9), 2e-7)
    b = encode_displacement(encode_tilt(beam, 2e-7), 3e-9)
    assert a == b


@given(st.floats(-5e-7, 5e-7), st.floats(-5e-7, 5e-7))
def test_displacement_linearity(d1, d2):
    s = BeamState(N, BASIS)
    a = encode_displacement(encode_displacement(s, d1), d2).coefficient(1)
    b = encode_displacement(s, d1 + d2).coefficient(1)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-20)


def test_first_order_thresholds(beam):
    with pytest.warns(FirstOrderWarning):
        encode_displacement(beam, 0.05 * BASIS.waist)
    with pytest.raises(ValueError, match="first-order"):
        encode_displacement(beam, 0.2 * BASIS.waist)
    with pytest.raises(ValueError):
        encode_tilt(beam, 0.2 / BASIS.tilt_coefficient)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        encode_displacement(beam, 0.005 * BASIS.waist)


def test_pzt_pure_displacement(beam):
    s = pzt_modulation(beam, 10.0, 0.0)
    assert s.coefficient(1).imag == 0
    assert s.coefficient(1).real > 0


def test_pzt_tilt_fraction(beam):
    c = pzt_modulation(beam, 10.0, 0.9).coefficient(1)
    assert c.imag**2 / abs(c) ** 2 == pytest.approx(0.9, rel=1e-12)


@given(st.floats(-30, 30))
def test_pzt_half_symmetric(power_db):
    c = pzt_modulation(BeamState(N, BASIS), power_db, 0.5).coefficient(1)
    assert abs(c.real) == pytest.approx(abs(c.imag), rel=1e-12)


def test_pzt_power_level(beam):
    s = pzt_modulation(beam, 7.0, 0.3)
    hom0 = homodyne_expectation(s, LocalOscillator(1, 0.0)).signal_mean ** 2
    hom90 = homodyne_expectation(s, LocalOscillator(1, math.pi / 2)).signal_mean ** 2
    assert 10 * math.log10(hom0 + hom90) == pytest.approx(7.0, abs=1e-12)


@given(st.floats(0.01, 0.99), st.floats(-20, 20))
def test_pzt_phase_power_ratio(t, power_db):
    s = pzt_modulation(BeamState(N, BASIS), power_db, t)
    p0 = homodyne_expectation(s, LocalOscillator(1, 0.0)).signal_mean ** 2
    p90 = homodyne_expectation(s, LocalOscillator(1, math.pi / 2)).signal_mean ** 2
    assert p90 / p0 == pytest.approx(t / (1 - t), rel=1e-9)


def test_pzt_errors(beam):
    with pytest.raises(ValueError):
        pzt_modulation(beam, 0.0, 1.2)
    with pytest.raises(ValueError):
        pzt_modulation(beam, float("nan"), 0.5)
    assert pzt_modulation(beam, -math.inf, 0.5) == beam


def test_squeezing_measured_pair(beam):
    s = set_noise_mode_squeezing(beam, 1, -2.0, 8.0, 0.0)
    nz = s.noise_of(1)
    assert nz.v_minus == pytest.approx(0.6309573444801932, rel=1e-12)
    assert nz.v_plus == pytest.approx(6.309573444801933, rel=1e-12)
    assert nz.v_minus * nz.v_plus == pytest.approx(3.9810717055349722, rel=1e-12)


def test_squeezing_zero_db_is_vacuum(beam):
    s = set_noise_mode_squeezing(beam, 1, 0.0, 0.0)
    assert s.noise_of(1).is_vacuum
    assert s == beam


def test_squeezing_rejects_uncertainty_violation(beam):
    # 10**-0.3 * 10**0.29 = 0.9772 < 1
    with pytest.raises(ValueError, match="uncertainty"):
        set_noise_mode_squeezing(beam, 1, -3.0, 2.9)


def test_loss_identity():
    nz = QuadratureNoise.from_db(-2, 8)
    assert apply_loss(nz, 1.0) == nz


def test_loss_perfect_squeezing_formula():
    assert lossy_variance(0.0, 0.8) == pytest.approx(0.2)


def test_loss_chain_example():
    source = QuadratureNoise.from_db(-3.6, 3.6)
    assert source.v_minus == pytest.approx(0.436515832240166, rel=1e-12)
    stage1 = apply_loss(source, 0.8)
    assert stage1.v_minus == pytest.approx(0.5492126657921328, rel=1e-12)
    out = apply_loss_chain(source, [0.8, 0.95])
    assert out.v_minus == pytest.approx(0.5717520325025262, rel=1e-12)
    assert out.v_minus_db == pytest.approx(-2.4279228285927665, abs=1e-10)


@pytest.mark.parametrize("eta", [-0.1, 1.1])
def test_loss_range(eta):
    with pytest.raises(ValueError):
        apply_loss(QuadratureNoise(), eta)


noise_db = st.tuples(st.floats(-15, 0), st.floats(0, 20)).filter(lambda p: p[0] + p[1] >= 0)


@given(noise_db, st.floats(0, 1), st.floats(0, 1))
def test_loss_composition(pair, e1, e2):
    nz = QuadratureNoise.from_db(*pair)
    a = apply_loss(apply_loss(nz, e2), e1)
    b = apply_loss(nz, e1 * e2)
    assert a.v_minus == pytest.approx(b.v_minus, rel=1e-12, abs=1e-15)
    assert a.v_plus == pytest.approx(b.v_plus, rel=1e-12, abs=1e-15)


@given(noise_db, st.floats(0, 1))
def test_loss_keeps_state_physical(pair, eta):
    out = apply_loss(QuadratureNoise.from_db(*pair), eta)
    assert out.v_minus * out.v_plus >= 1 - 1e-12


@given(st.floats(-20, 0), st.floats(0, 1))
def test_loss_never_lowers_pure_state_product(sq_db, eta):
    nz = QuadratureNoise.from_db(sq_db, -sq_db)
    assume(nz.v_minus * nz.v_plus >= 1)
    out = apply_loss(nz, eta)
    assert out.v_minus * out.v_plus >= nz.v_minus * nz.v_plus * (1 - 1e-12)


def test_loss_can_lower_mixed_state_product():
    # product >= input only holds for minimum-uncertainty input
    nz = QuadratureNoise(1.0, 100.0)
    out = apply_loss(nz, 0.5)
    assert out.v_minus * out.v_plus < nz.v_minus * nz.v_plus


@given(st.floats(0, 1))
def test_vacuum_fixed_point(eta):
    out = apply_loss(QuadratureNoise(1.0, 1.0, 0.3), eta)
    assert (out.v_minus, out.v_plus) == (1.0, 1.0)


def test_state_validation():
    with pytest.raises(ValueError):
        BeamState(0.0, BASIS)
    with pytest.raises(ValueError):
        BeamState(N, BASIS, {9: 0.1j})


def test_state_is_immutable(beam):
    with pytest.raises(TypeError):
        beam.coefficients[1] = 0.5


def test_json_roundtrip(beam):
    s = set_noise_mode_squeezing(encode_tilt(encode_displacement(beam, 1e-9), 1e-7), 1, -2, 8, 0.1)
    doc = s.to_dict()
    assert set(doc) == {"n_photons", "basis", "modes"}
    assert set(doc["modes"][0]) == {"index", "re", "im", "v_minus_db", "v_plus_db", "angle"}
    back = BeamState.from_json(s.to_json())
    assert back.n_photons == s.n_photons
    assert back.coefficient(1) == s.coefficient(1)
    assert back.noise_of(1).v_minus == pytest.approx(s.noise_of(1).v_minus, rel=1e-14)
    assert back.noise_of(1).angle == 0.1
