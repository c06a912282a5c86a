import math

import numpy as np
import pytest

from spatial_homodyne.beam_state import (BeamState, encode_displacement, encode_tilt, pzt_modulation,
                                         set_noise_mode_squeezing)
from spatial_homodyne.detection import LocalOscillator
from spatial_homodyne.hg_modes import Basis
from spatial_homodyne.radiometry import (CHUNK_SAMPLES, RadiometryParams, Trace, TraceConfig,
                                         amplitude_at_level, fit_scan_envelope, min_detectable,
                                         photons_per_interval, qnl_displacement, qnl_tilt,
                                         quadrature_samples, simulate_homodyne_trace, snr_report)

WORKED_EXAMPLE = RadiometryParams(1e-3, 1e-6, 1e5, 100.0)
EXPERIMENT = RadiometryParams(170e-6, 1.064e-6, 1e5, 100.0)
BASIS = Basis(106e-6, 1.064e-6)

# P lambda / (h c RBW) with CODATA h, c (exact SI values).
N_EXAMPLE = 50341165675.4271
N_EXPERIMENT = 9105710047.371254


def test_photon_numbers():
    assert photons_per_interval(WORKED_EXAMPLE) == pytest.approx(N_EXAMPLE, rel=1e-12)
    assert photons_per_interval(EXPERIMENT) == pytest.approx(N_EXPERIMENT, rel=1e-12)
    half = RadiometryParams(0.5e-3, 1e-6, 1e5, 100.0)
    assert photons_per_interval(half) == pytest.approx(N_EXAMPLE / 2, rel=1e-14)


@pytest.mark.parametrize("kwargs", [dict(power=0), dict(rbw=-1), dict(vbw=2e5)])
def test_radiometry_validation(kwargs):
    base = dict(power=1e-3, wavelength=1e-6, rbw=1e5, vbw=100.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        RadiometryParams(**base)


def test_qnl_displacement_values():
    assert qnl_displacement(100e-6, N_EXAMPLE) == pytest.approx(2.2284781001554226e-10, rel=1e-12)
    assert qnl_displacement(106e-6, N_EXPERIMENT) == pytest.approx(5.554167349725606e-10, rel=1e-12)
    assert qnl_displacement(1e-4, 4 * N_EXAMPLE) == pytest.approx(qnl_displacement(1e-4, N_EXAMPLE) / 2)


def test_qnl_tilt_values():
    t = qnl_tilt(106e-6, 1.064e-6, N_EXPERIMENT)
    assert t == pytest.approx(1.6741678044329342e-08, rel=1e-12)
    assert t * math.pi * 106e-6 / 1.064e-6 == pytest.approx(qnl_displacement(106e-6, N_EXPERIMENT) / 106e-6)
    assert 20 * math.log10(1e-7 / t) == pytest.approx(15.524020283045425, abs=1e-9)


def test_min_detectable():
    assert min_detectable(2.2284781001554226e-10, 1e5, 100) == pytest.approx(7.047066512295965e-12, rel=1e-12)
    assert min_detectable(1e-9, 1e5, 1e5) == 1e-9
    assert min_detectable(1e-9, 1e5, 25.0) == pytest.approx(min_detectable(1e-9, 1e5, 100.0) / 2)
    with pytest.raises(ValueError):
        min_detectable(1e-9, 100.0, 1e5)


def test_amplitude_at_level():
    assert amplitude_at_level(1.0, 0.0) == 1.0
    assert amplitude_at_level(1.0, -20 * math.log10(2)) == pytest.approx(0.5)
    assert amplitude_at_level(0.56e-9, -1.5) == pytest.approx(0.4714e-9, rel=1e-3)


def _state(noise_db=None, d=0.0, theta=0.0):
    s = BeamState(N_EXPERIMENT, BASIS)
    s = encode_tilt(encode_displacement(s, d), theta)
    if noise_db is not None:
        s = set_noise_mode_squeezing(s, 1, *noise_db)
    return s


def test_trace_config_validation():
    with pytest.raises(ValueError):
        TraceConfig(_state(), LocalOscillator(), "sweep")
    with pytest.raises(ValueError):
        TraceConfig(_state(), LocalOscillator(), n_samples=0)


@pytest.mark.parametrize("phase, expected_db", [(0.0, -2.0), (math.pi / 2, 8.0)])
def test_locked_floor_levels(phase, expected_db):
    cfg = TraceConfig(_state((-2.0, 8.0)), LocalOscillator(1, phase), "locked", phase,
                      n_samples=100_000, seed=11)
    assert simulate_homodyne_trace(cfg).level_db() == pytest.approx(expected_db, abs=0.1)


def test_coherent_floor_is_zero_db():
    cfg = TraceConfig(_state(), LocalOscillator(), "locked", 0.0, n_samples=100_000, seed=3)
    assert simulate_homodyne_trace(cfg).level_db() == pytest.approx(0.0, abs=0.1)


@pytest.mark.parametrize("seed", [0, 1, 99])
@pytest.mark.parametrize("phase", [0.0, 0.7, math.pi / 2])
def test_monte_carlo_variance_converges(seed, phase):
    nz_state = _state((-2.0, 8.0), d=qnl_displacement(106e-6, N_EXPERIMENT))
    cfg = TraceConfig(nz_state, LocalOscillator(1, phase), "locked", phase, n_samples=20_000, seed=seed)
    q = quadrature_samples(cfg).ravel()
    nz = nz_state.noise_of(1)
    v = nz.v_minus * math.cos(phase) ** 2 + nz.v_plus * math.sin(phase) ** 2
    se = v * math.sqrt(2 / (q.size - 1))
    assert abs(q.var(ddof=1) - v) < 3 * se


def test_qnl_crossing_from_simulation():
    d_qnl = qnl_displacement(BASIS.waist, N_EXPERIMENT)
    cfg = TraceConfig(_state(d=d_qnl), LocalOscillator(), "locked", 0.0, n_samples=50_000, seed=5)
    q = quadrature_samples(cfg).ravel()
    mean, se = q.mean(), q.std(ddof=1) / math.sqrt(q.size)
    assert abs(mean - 1.0) < 3 * se
    # SNR = 1 at d_QNL means the trace sits 3.01 dB above the unmodulated floor
    assert simulate_homodyne_trace(cfg).level_db() == pytest.approx(10 * math.log10(2), abs=0.1)


def test_trace_matches_its_samples():
    cfg = TraceConfig(_state((-2, 8), d=1e-9), LocalOscillator(1, 0.3), "scan", n_samples=500, seed=4,
                      n_average=7)
    q = quadrature_samples(cfg)
    tr = simulate_homodyne_trace(cfg)
    np.testing.assert_allclose(tr.power_db, 10 * np.log10(np.mean(q**2, axis=1)), rtol=1e-12)


def test_scan_phases():
    cfg = TraceConfig(_state(), LocalOscillator(), "scan", n_samples=5)
    np.testing.assert_allclose(cfg.phases(), [0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_determinism_across_workers(workers):
    cfg = TraceConfig(_state((-2, 8)), LocalOscillator(), "scan", n_samples=3 * CHUNK_SAMPLES + 17,
                      seed=21, n_average=2)
    a = simulate_homodyne_trace(cfg, workers=1).power_db
    b = simulate_homodyne_trace(cfg, workers=workers).power_db
    assert np.array_equal(a, b)


def test_seed_changes_trace():
    base = TraceConfig(_state(), LocalOscillator(), n_samples=100, seed=1)
    other = TraceConfig(_state(), LocalOscillator(), n_samples=100, seed=2)
    assert not np.array_equal(simulate_homodyne_trace(base).power_db, simulate_homodyne_trace(other).power_db)


def test_vbw_averaging_narrows_scatter():
    s = _state()
    narrow = simulate_homodyne_trace(TraceConfig(s, LocalOscillator(), n_samples=2000, seed=1, n_average=100))
    wide = simulate_homodyne_trace(TraceConfig(s, LocalOscillator(), n_samples=2000, seed=1, n_average=1))
    assert np.std(narrow.linear) == pytest.approx(np.std(wide.linear) / 10, rel=0.15)


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_scan_envelope_recovers_tilt_fraction(t):
    base = set_noise_mode_squeezing(BeamState(N_EXPERIMENT, BASIS), 1, -2, 8)
    mod = pzt_modulation(base, 10.0, t)
    ref = TraceConfig(base, LocalOscillator(), "scan", n_samples=4000, seed=1, n_average=1000)
    sig = TraceConfig(mod, LocalOscillator(), "scan", n_samples=4000, seed=2, n_average=1000)
    fit = fit_scan_envelope(sig.phases(), simulate_homodyne_trace(sig).power_db,
                            simulate_homodyne_trace(ref).power_db)
    assert fit["tilt_fraction"] == pytest.approx(t, abs=0.02)
    assert fit["amplitude"] == pytest.approx(10.0, rel=0.05)
    assert math.tan(fit["psi"]) ** 2 == pytest.approx(t / (1 - t), rel=0.15)


def test_fit_exact_on_noiseless_data():
    phi = np.linspace(0, 2 * np.pi, 101)
    y = 3.0 * np.cos(phi - 0.4) ** 2 + 0.5
    fit = fit_scan_envelope(phi, 10 * np.log10(y))
    assert fit["amplitude"] == pytest.approx(3.0)
    assert fit["offset"] == pytest.approx(0.5)
    assert fit["psi"] == pytest.approx(0.4)
    assert fit["residual_rms"] < 1e-12


def test_trace_csv_roundtrip(tmp_path):
    tr = simulate_homodyne_trace(TraceConfig(_state(), LocalOscillator(), "scan", n_samples=50, seed=9))
    path = tr.to_csv(tmp_path / "t.csv")
    assert path.read_text().splitlines()[0] == "index,phi_rad,power_db"
    back = Trace.from_csv(path)
    assert np.array_equal(back.power_db, tr.power_db)
    assert np.array_equal(back.phi, tr.phi)


def test_snr_report_sub_qnl_level():
    s = _state()
    r = snr_report(s, LocalOscillator(), EXPERIMENT, measured_level_db=-1.5)
    assert r["min_displacement_m"] == pytest.approx(5.554167349725606e-10 * 10 ** (-1.5 / 20), rel=1e-9)
    assert r["min_displacement_m"] == pytest.approx(0.467e-9, abs=0.001e-9)
    assert snr_report(s, LocalOscillator(), EXPERIMENT, 0.0)["min_displacement_m"] == r["d_qnl_m"]
    half = snr_report(s, LocalOscillator(), EXPERIMENT, -20 * math.log10(2))["min_displacement_m"]
    assert half == pytest.approx(r["d_qnl_m"] / 2)


def test_snr_report_uses_detector_floor():
    s = _state((-2, 8))
    r = snr_report(s, LocalOscillator(), EXPERIMENT)
    assert r["noise_level_db"] == pytest.approx(-2.0, abs=1e-12)
    assert r["encoded_displacement_m"] == 0


def test_snr_report_tilt_readout():
    s = _state(theta=1e-7)
    r = snr_report(s, LocalOscillator(1, math.pi / 2), EXPERIMENT)
    assert r["encoded_tilt_rad"] == pytest.approx(1e-7, rel=1e-12)
    assert r["signal_db_above_qnl"] == pytest.approx(15.524020283045425, abs=1e-6)
    assert r["outcome"]["snr_db"] == pytest.approx(15.524020283045425, abs=1e-6)


def test_n_average_from_bandwidths():
    assert EXPERIMENT.n_average == 1000
    assert RadiometryParams(1e-3, 1e-6, 1e5, 1e5).n_average == 1

