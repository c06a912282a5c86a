"""Spatial homodyne detection of Gaussian-beam displacement and tilt at and below the quantum noise limit."""
from .beam_state import (BeamState, QuadratureNoise, apply_loss, encode_displacement, encode_tilt,
                         pzt_modulation, set_noise_mode_squeezing)
from .detection import (LocalOscillator, MeasurementOutcome, homodyne_expectation, noise_variance_at,
                        split_detector_expectation, visibility_to_efficiency)
from .hg_modes import Basis, ModeCoefficients, SampledProfile, decompose, derivative_profile, hg_amplitude, overlap
from .radiometry import (RadiometryParams, TraceConfig, min_detectable, photons_per_interval, qnl_displacement,
                         qnl_tilt, simulate_homodyne_trace, snr_report)

__version__ = "0.1.0"
