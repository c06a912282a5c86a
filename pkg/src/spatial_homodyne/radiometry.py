"""Photon bookkeeping, quantum-noise-limit calculators and Monte Carlo homodyne traces.

dB convention: noise and signal *powers* use ``10 log10`` of linear ratios;
displacement and tilt *amplitudes* use ``20 log10``. All trace powers are
relative to the quantum noise limit (vacuum variance = 1, i.e. 0 dB).

Traces are synthesised at baseband, one Gaussian draw per measurement
interval ``1/RBW``; each displayed point averages ``RBW/VBW`` consecutive
intervals (video filtering modelled as a block average).
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK

from .beam_state import BeamState
from .detection import LocalOscillator, homodyne_expectation, homodyne_moments

# Samples per RNG stream. Fixed so that chunking never depends on worker count.
CHUNK_SAMPLES = 4096


@dataclass(frozen=True)
class RadiometryParams:
    power: float
    wavelength: float
    rbw: float
    vbw: float

    def __post_init__(self):
        for name in ("power", "wavelength", "rbw", "vbw"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.vbw > self.rbw:
            raise ValueError(f"vbw ({self.vbw}) must not exceed rbw ({self.rbw})")

    @property
    def interval(self) -> float:
        return 1.0 / self.rbw

    @property
    def n_average(self) -> int:
        """Measurement intervals averaged per displayed point."""
        return max(1, round(self.rbw / self.vbw))


def photons_per_interval(params: RadiometryParams) -> float:
    """Photons delivered in one resolution interval, ``P lambda / (h c RBW)``."""
    return params.power * params.wavelength / (PLANCK * SPEED_OF_LIGHT * params.rbw)


def qnl_displacement(waist: float, n_photons: float) -> float:
    """Displacement giving unit SNR with coherent light, ``w / (2 sqrt(N))``."""
    if waist <= 0 or n_photons <= 0:
        raise ValueError("waist and photon number must be positive")
    return waist / (2.0 * math.sqrt(n_photons))


def qnl_tilt(waist: float, wavelength: float, n_photons: float) -> float:
    """Tilt giving unit SNR with coherent light, ``lambda / (2 pi w sqrt(N))``."""
    if waist <= 0 or wavelength <= 0 or n_photons <= 0:
        raise ValueError("waist, wavelength and photon number must be positive")
    return wavelength / (2.0 * math.pi * waist * math.sqrt(n_photons))


def min_detectable(qnl: float, rbw: float, vbw: float) -> float:
    """QNL improved by video averaging over ``RBW/VBW`` intervals (amplitude scales as the root)."""
    if vbw > rbw:
        raise ValueError(f"vbw ({vbw}) must not exceed rbw ({rbw})")
    if vbw <= 0:
        raise ValueError("vbw must be positive")
    return qnl / math.sqrt(rbw / vbw)


def amplitude_at_level(qnl: float, level_db: float) -> float:
    """Amplitude whose SNR is one against a noise floor ``level_db`` relative to shot noise."""
    return qnl * 10.0 ** (level_db / 20.0)


@dataclass(frozen=True)
class TraceConfig:
    """Acquisition settings for one simulated spectrum-analyser trace.

    ``mode='scan'`` sweeps the LO phase linearly over ``[0, 2 pi]``;
    ``mode='locked'`` holds it at ``phase``.
    """

    state: BeamState
    lo: LocalOscillator
    mode: Literal["scan", "locked"] = "locked"
    phase: float = 0.0
    n_samples: int = 10_000
    seed: int = 0
    n_average: int = 1

    def __post_init__(self):
        if self.mode not in ("scan", "locked"):
            raise ValueError(f"mode must be 'scan' or 'locked', got {self.mode!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.n_average < 1:
            raise ValueError("n_average must be >= 1")

    def phases(self) -> np.ndarray:
        if self.mode == "scan":
            return np.linspace(0.0, 2 * np.pi, self.n_samples)
        return np.full(self.n_samples, float(self.phase))


@dataclass(frozen=True, eq=False)
class Trace:
    phi: np.ndarray
    power_db: np.ndarray

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.power_db.size)

    @property
    def linear(self) -> np.ndarray:
        return 10.0 ** (self.power_db / 10.0)

    def level_db(self) -> float:
        """Power-averaged level of the whole trace in dB."""
        return 10.0 * math.log10(float(np.mean(self.linear)))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["index", "phi_rad", "power_db"])
            for i, (p, v) in enumerate(zip(self.phi, self.power_db)):
                wr.writerow([i, repr(float(p)), repr(float(v))])
        return path

    @classmethod
    def from_csv(cls, path) -> "Trace":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 1], data[:, 2])


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _chunk_bounds(n: int):
    return [(k, k * CHUNK_SAMPLES, min(n, (k + 1) * CHUNK_SAMPLES))
            for k in range(-(-n // CHUNK_SAMPLES))]


def _run_chunks(cfg: TraceConfig, body, workers: int) -> np.ndarray:
    mean, var = homodyne_moments(cfg.state, cfg.lo, cfg.phases())
    mean = np.broadcast_to(mean, (cfg.n_samples,))
    sigma = np.sqrt(np.broadcast_to(var, (cfg.n_samples,)))

    def one(bounds):
        k, lo, hi = bounds
        g = _chunk_rng(cfg.seed, k).standard_normal((hi - lo, cfg.n_average))
        return body(mean[lo:hi, None] + sigma[lo:hi, None] * g)

    chunks = _chunk_bounds(cfg.n_samples)
    if workers <= 1:
        parts = [one(b) for b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, chunks))
    return np.concatenate(parts)


def quadrature_samples(cfg: TraceConfig, workers: int = 1) -> np.ndarray:
    """Raw homodyne quadrature draws, shape ``(n_samples, n_average)``.

    Each row uses the LO phase of that sample; the same draws underlie
    :func:`simulate_homodyne_trace` for the same config.
    """
    return _run_chunks(cfg, lambda q: q, workers)


def simulate_homodyne_trace(cfg: TraceConfig, workers: int = 1) -> Trace:
    """Monte Carlo spectrum-analyser trace in dB relative to the QNL.

    Output is bit-identical for a given config regardless of ``workers``:
    every block of ``CHUNK_SAMPLES`` points draws from its own Philox stream
    keyed by ``(seed, block index)``.
    """
    power = _run_chunks(cfg, lambda q: np.mean(q * q, axis=1), workers)
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(power)
    return Trace(cfg.phases(), power_db)


def fit_scan_envelope(phi, power_db, reference_db=None) -> dict:
    """Least-squares fit of ``A cos^2(phi - psi) + B`` to a scanned trace.

    If ``reference_db`` (e.g. the unmodulated noise trace) is given, its
    linear power is subtracted first so that only the modulation remains.
    ``psi`` is the LO angle of maximum response; for a TEM10 signal,
    ``sin^2(psi)`` is the share of power in the tilt quadrature.
    """
    phi = np.asarray(phi, dtype=float)
    y = 10.0 ** (np.asarray(power_db, dtype=float) / 10.0)
    if reference_db is not None:
        y = y - 10.0 ** (np.asarray(reference_db, dtype=float) / 10.0)
    design = np.column_stack([np.ones_like(phi), np.cos(2 * phi), np.sin(2 * phi)])
    (c0, c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    half_amp = math.hypot(c1, c2)
    psi = 0.5 * math.atan2(c2, c1) % math.pi
    resid = y - design @ np.array([c0, c1, c2])
    return {"amplitude": 2 * half_amp, "offset": c0 - half_amp, "psi": psi,
            "tilt_fraction": math.sin(psi) ** 2,
            "residual_rms": float(np.sqrt(np.mean(resid**2)))}


def snr_report(state: BeamState, lo: LocalOscillator, params: RadiometryParams,
               measured_level_db: float | None = None) -> dict:
    """QNL figures and the homodyne reading for ``state``, in SI units.

    ``min_displacement_m`` is the displacement that would give unit SNR
    against the noise floor, ``d_QNL * 10**(level_db / 20)``, where the
    level is ``measured_level_db`` if given, otherwise the detector's own
    noise floor.
    """
    n = state.n_photons
    w, lam = state.basis.waist, state.basis.wavelength
    d_qnl = qnl_displacement(w, n)
    t_qnl = qnl_tilt(w, lam, n)
    outcome = homodyne_expectation(state, lo)
    level = outcome.noise_db if measured_level_db is None else measured_level_db
    c = state.coefficient(lo.mode)
    signal_db = 20.0 * math.log10(abs(outcome.signal_mean)) if outcome.signal_mean else None
    return {
        "convention": "powers 10*log10, amplitudes 20*log10; levels relative to shot noise",
        "n_photons": n,
        "d_qnl_m": d_qnl,
        "theta_qnl_rad": t_qnl,
        "d_min_m": min_detectable(d_qnl, params.rbw, params.vbw),
        "theta_min_rad": min_detectable(t_qnl, params.rbw, params.vbw),
        "lo": {"mode": lo.mode, "phase_rad": lo.phase, "mode_match": lo.mode_match},
        "outcome": outcome.to_dict(),
        "signal_db_above_qnl": signal_db,
        "encoded_displacement_m": c.real * w,
        "encoded_tilt_rad": c.imag / state.basis.tilt_coefficient,
        "noise_level_db": level,
        "min_displacement_m": amplitude_at_level(d_qnl, level),
        "min_tilt_rad": amplitude_at_level(t_qnl, level),
    }
