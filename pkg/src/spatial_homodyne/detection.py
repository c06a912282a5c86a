"""Detector models: spatial homodyne with a selectable local oscillator, and the split detector.

Outputs are in quadrature units where vacuum noise has unit variance. A
homodyne detector whose LO carries TEM_n selects TEM_n as its noise mode;
only that mode's coherent amplitude and noise reach the photocurrent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beam_state import SIGNAL_MODE, BeamState, QuadratureNoise

# Overlap of the flipped mode sign(x) u_0 with u_1.
SPLIT_DETECTOR_FACTOR = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class LocalOscillator:
    mode: int = SIGNAL_MODE
    phase: float = 0.0
    mode_match: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mode_match <= 1.0:
            raise ValueError(f"mode_match must lie in [0, 1], got {self.mode_match!r}")
        if not math.isfinite(self.phase):
            raise ValueError("LO phase must be finite")
        object.__setattr__(self, "phase", math.fmod(self.phase, 2 * math.pi) % (2 * math.pi))


@dataclass(frozen=True)
class MeasurementOutcome:
    """Mean signal and noise variance of one detector reading."""

    signal_mean: float
    noise_variance: float

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    @property
    def snr_power(self) -> float:
        return self.signal_mean**2 / self.noise_variance

    @property
    def snr_amplitude(self) -> float:
        return abs(self.signal_mean) / math.sqrt(self.noise_variance)

    @property
    def snr_db(self) -> float:
        p = self.snr_power
        return 10 * math.log10(p) if p > 0 else -math.inf

    @property
    def noise_db(self) -> float:
        return 10 * math.log10(self.noise_variance)

    def to_dict(self) -> dict:
        snr_db = self.snr_db
        return {"signal_mean": self.signal_mean,
                "noise_variance": self.noise_variance,
                "noise_db": self.noise_db,
                "snr_power": self.snr_power,
                "snr_db": snr_db if math.isfinite(snr_db) else None}


def noise_variance_at(noise: QuadratureNoise, phi: float) -> float:
    """Variance of the quadrature at angle ``phi``: ``v- cos^2(phi-a) + v+ sin^2(phi-a)``."""
    delta = phi - noise.angle
    return noise.v_minus * math.cos(delta) ** 2 + noise.v_plus * math.sin(delta) ** 2


def homodyne_moments(state: BeamState, lo: LocalOscillator, phi=None):
    """Signal mean and noise variance for LO phase(s) ``phi`` (defaults to ``lo.phase``).

    Vectorised over ``phi``; the LO mode and mode matching come from ``lo``.
    """
    phi = lo.phase if phi is None else np.asarray(phi, dtype=float)
    c = state.coefficient(lo.mode)
    eta = lo.mode_match
    nz = state.noise_of(lo.mode)
    signal = 2.0 * math.sqrt(state.n_photons * eta) * (c.real * np.cos(phi) + c.imag * np.sin(phi))
    delta = phi - nz.angle
    v = nz.v_minus * np.cos(delta) ** 2 + nz.v_plus * np.sin(delta) ** 2
    return signal, eta * v + (1.0 - eta)


def homodyne_expectation(state: BeamState, lo: LocalOscillator) -> MeasurementOutcome:
    """Spatial homodyne reading of the LO mode's quadrature at ``lo.phase``.

    Mode mismatch acts as a beam splitter of transmission ``lo.mode_match``:
    it scales the signal amplitude by its square root and blends the noise
    with vacuum.
    """
    signal, variance = homodyne_moments(state, lo)
    return MeasurementOutcome(float(signal), float(variance))


def split_detector_expectation(state: BeamState) -> MeasurementOutcome:
    """Two-segment photodiode difference signal.

    The detector reads the amplitude quadrature of the flipped mode
    ``sign(x) u_0``, which overlaps TEM10 by sqrt(2/pi). Tilt lives in the
    phase quadrature and gives no signal. Noise on TEM10 enters weighted by
    the same overlap squared; all other modes are taken as vacuum.
    """
    c = state.coefficient(SIGNAL_MODE)
    signal = SPLIT_DETECTOR_FACTOR * 2.0 * math.sqrt(state.n_photons) * c.real
    v10 = noise_variance_at(state.noise_of(SIGNAL_MODE), 0.0)
    variance = 1.0 + SPLIT_DETECTOR_FACTOR**2 * (v10 - 1.0)
    return MeasurementOutcome(signal, variance)


def visibility_to_efficiency(v: float) -> float:
    """Mode-matching efficiency from fringe visibility, ``eta = v**2``."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    return v * v
