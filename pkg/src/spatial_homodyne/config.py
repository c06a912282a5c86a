"""Scenario configuration: strict JSON schema and builders for states and detectors."""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from .beam_state import (BeamState, QuadratureNoise, apply_loss_chain, encode_displacement,
                         encode_tilt, pzt_modulation)
from .detection import LocalOscillator, visibility_to_efficiency
from .hg_modes import Basis
from .radiometry import RadiometryParams, TraceConfig, photons_per_interval

BUNDLED = ("qnl_example", "experiment", "phase_scan")


class ConfigError(ValueError):
    """Invalid scenario; message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RadiometrySection(_Strict):
    power_w: PositiveFloat
    wavelength_m: PositiveFloat
    rbw_hz: PositiveFloat
    vbw_hz: PositiveFloat

    @model_validator(mode="after")
    def _vbw_le_rbw(self):
        if self.vbw_hz > self.rbw_hz:
            raise ValueError("vbw_hz must not exceed rbw_hz")
        return self


class BasisSection(_Strict):
    waist_m: PositiveFloat
    max_order: int = Field(8, ge=1)


class PztSection(_Strict):
    power_db: float
    tilt_fraction: float = Field(ge=0.0, le=1.0)


class SignalSection(_Strict):
    displacement_m: float = 0.0
    tilt_rad: float = 0.0
    pzt: Optional[PztSection] = None


class NoiseSection(_Strict):
    mode: int = Field(1, ge=0)
    v_minus_db: float = 0.0
    v_plus_db: float = 0.0
    angle_rad: float = 0.0
    loss_chain: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        if self.v_minus_db + self.v_plus_db < -1e-12:
            raise ValueError("v_minus_db + v_plus_db < 0 violates the uncertainty product")
        for eta in self.loss_chain:
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"loss_chain entry {eta} outside [0, 1]")
        return self


class DetectorSection(_Strict):
    kind: Literal["homodyne", "split"] = "homodyne"
    lo_mode: int = Field(1, ge=0)
    visibility: float = Field(1.0, ge=0.0, le=1.0)
    locked_phases_pi: list[float] = Field(default_factory=lambda: [0.0, 0.5])
    scan: bool = True


class TraceSection(_Strict):
    n_samples: int = Field(2000, ge=1)
    seed: int = Field(0, ge=0)
    n_average: Optional[int] = Field(None, ge=1)


class OutputSection(_Strict):
    dir: str = "out"
    prefix: str = "scenario"


class ScenarioConfig(_Strict):
    name: str = ""
    radiometry: RadiometrySection
    basis: BasisSection
    signal: SignalSection = SignalSection()
    noise: NoiseSection = NoiseSection()
    detector: DetectorSection = DetectorSection()
    trace: TraceSection = TraceSection()
    output: OutputSection = OutputSection()
    measured_level_db: Optional[float] = None


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(doc: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def load_config(path) -> ScenarioConfig:
    """Read a scenario from ``path`` or, if no such file exists, a bundled scenario name."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        text = resources.files(__package__).joinpath("scenarios", f"{path}.json").read_text()
    else:
        text = p.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc)


def with_overrides(cfg: ScenarioConfig, seed: int | None = None, out: str | None = None) -> ScenarioConfig:
    doc = cfg.model_dump()
    if seed is not None:
        doc["trace"]["seed"] = seed
    if out is not None:
        doc["output"]["dir"] = str(out)
    return parse_config(doc)


def radiometry(cfg: ScenarioConfig) -> RadiometryParams:
    r = cfg.radiometry
    return RadiometryParams(r.power_w, r.wavelength_m, r.rbw_hz, r.vbw_hz)


def basis(cfg: ScenarioConfig) -> Basis:
    return Basis(cfg.basis.waist_m, cfg.radiometry.wavelength_m, cfg.basis.max_order)


def noise(cfg: ScenarioConfig) -> QuadratureNoise:
    n = cfg.noise
    try:
        source = QuadratureNoise.from_db(n.v_minus_db, n.v_plus_db, n.angle_rad)
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from None
    return apply_loss_chain(source, n.loss_chain)


def build_state(cfg: ScenarioConfig, with_signal: bool = True, with_noise: bool = True) -> BeamState:
    """Beam described by ``cfg``; signal and squeezing can be switched off for reference traces."""
    b = basis(cfg)
    if cfg.noise.mode > b.max_order:
        raise ConfigError(f"noise.mode: {cfg.noise.mode} exceeds basis.max_order {b.max_order}")
    state = BeamState(photons_per_interval(radiometry(cfg)), b)
    if with_signal:
        s = cfg.signal
        try:
            state = encode_displacement(state, s.displacement_m)
            state = encode_tilt(state, s.tilt_rad)
            if s.pzt is not None:
                state = pzt_modulation(state, s.pzt.power_db, s.pzt.tilt_fraction)
        except ValueError as exc:
            raise ConfigError(f"signal: {exc}") from None
    if with_noise:
        nz = noise(cfg)
        if not nz.is_vacuum:
            state = BeamState(state.n_photons, state.basis, state.coefficients,
                              {**state.noise, cfg.noise.mode: nz})
    return state


def local_oscillator(cfg: ScenarioConfig, phase: float = 0.0) -> LocalOscillator:
    d = cfg.detector
    return LocalOscillator(d.lo_mode, phase, visibility_to_efficiency(d.visibility))


def trace_config(cfg: ScenarioConfig, state: BeamState, mode: str, phase: float = 0.0,
                 seed: int | None = None) -> TraceConfig:
    t = cfg.trace
    n_avg = t.n_average if t.n_average is not None else radiometry(cfg).n_average
    return TraceConfig(state, local_oscillator(cfg, phase), mode, phase, t.n_samples,
                       t.seed if seed is None else seed, n_avg)


def phase_from_pi(fraction: float) -> float:
    return fraction * math.pi
