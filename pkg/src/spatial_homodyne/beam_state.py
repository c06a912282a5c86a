"""Multimode Gaussian beam state and the displacement/tilt encoders.

Coherent amplitudes are stored relative to the carrier amplitude ``sqrt(N)``,
so a displacement ``d`` appears verbatim as ``d / w`` in the TEM10 entry and a
tilt ``theta`` as ``i pi w theta / lambda``. Quadrature variances are in
shot-noise units (vacuum = 1). Squeeze angle 0 squeezes the quadrature in
phase with the carrier, i.e. the displacement quadrature.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from .hg_modes import Basis

CARRIER = 0
SIGNAL_MODE = 1
FIRST_ORDER_WARN = 1e-2
FIRST_ORDER_LIMIT = 1e-1
_UNCERTAINTY_SLACK = 1e-12


class FirstOrderWarning(UserWarning):
    """TEM10 amplitude large enough that second-order terms exceed 1%."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(v: float) -> float:
    return 10.0 * math.log10(v)


@dataclass(frozen=True)
class QuadratureNoise:
    """Gaussian noise of one mode: squeezed/anti-squeezed variances and angle."""

    v_minus: float = 1.0
    v_plus: float = 1.0
    angle: float = 0.0

    def __post_init__(self):
        if not (self.v_minus > 0 and self.v_plus > 0):
            raise ValueError("quadrature variances must be positive")
        if not all(math.isfinite(v) for v in (self.v_minus, self.v_plus, self.angle)):
            raise ValueError("quadrature noise must be finite")
        if self.v_minus * self.v_plus < 1.0 - _UNCERTAINTY_SLACK:
            raise ValueError(
                f"uncertainty product {self.v_minus * self.v_plus:.6g} < 1 "
                f"(v_minus={self.v_minus:.6g}, v_plus={self.v_plus:.6g})")

    @classmethod
    def from_db(cls, v_minus_db: float, v_plus_db: float, angle: float = 0.0) -> "QuadratureNoise":
        return cls(db_to_linear(v_minus_db), db_to_linear(v_plus_db), angle)

    @property
    def v_minus_db(self) -> float:
        return linear_to_db(self.v_minus)

    @property
    def v_plus_db(self) -> float:
        return linear_to_db(self.v_plus)

    @property
    def is_vacuum(self) -> bool:
        return self.v_minus == 1.0 and self.v_plus == 1.0


VACUUM = QuadratureNoise()


def _frozen(d: Mapping) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class BeamState:
    """Bright TEM00 carrier with small coherent amplitudes and noise per mode.

    Attributes
    ----------
    n_photons : float
        Carrier photons per measurement interval ``1/RBW``.
    basis : Basis
        Waist and wavelength used to convert displacement and tilt.
    coefficients : mapping of mode index to complex
        Coherent amplitude relative to ``sqrt(n_photons)``; the carrier is 1.
    noise : mapping of mode index to QuadratureNoise
        Modes missing from the mapping are in vacuum.
    """

    n_photons: float
    basis: Basis
    coefficients: Mapping[int, complex] = field(default_factory=lambda: {CARRIER: 1.0 + 0j})
    noise: Mapping[int, QuadratureNoise] = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.n_photons) and self.n_photons > 0):
            raise ValueError(f"n_photons must be positive, got {self.n_photons!r}")
        coeffs = {int(k): complex(v) for k, v in self.coefficients.items()}
        coeffs.setdefault(CARRIER, 1.0 + 0j)
        for k in list(coeffs) + list(self.noise):
            if not 0 <= k <= self.basis.max_order:
                raise ValueError(f"mode index {k} outside basis 0..{self.basis.max_order}")
        object.__setattr__(self, "coefficients", _frozen(coeffs))
        object.__setattr__(self, "noise", _frozen({int(k): v for k, v in self.noise.items()}))

    def coefficient(self, mode: int) -> complex:
        return self.coefficients.get(mode, 0j)

    def noise_of(self, mode: int) -> QuadratureNoise:
        return self.noise.get(mode, VACUUM)

    def __eq__(self, other):
        if not isinstance(other, BeamState):
            return NotImplemented
        return (self.n_photons == other.n_photons and self.basis == other.basis
                and dict(self.coefficients) == dict(other.coefficients)
                and dict(self.noise) == dict(other.noise))

    def to_dict(self) -> dict:
        modes = []
        for idx in sorted(set(self.coefficients) | set(self.noise)):
            c, nz = self.coefficient(idx), self.noise_of(idx)
            modes.append({"index": idx, "re": c.real, "im": c.imag,
                          "v_minus_db": nz.v_minus_db, "v_plus_db": nz.v_plus_db,
                          "angle": nz.angle})
        return {"n_photons": self.n_photons,
                "basis": {"waist": self.basis.waist, "wavelength": self.basis.wavelength,
                          "max_order": self.basis.max_order},
                "modes": modes}

    @classmethod
    def from_dict(cls, doc: dict) -> "BeamState":
        basis = Basis(**doc["basis"])
        coeffs, noise = {}, {}
        for m in doc.get("modes", []):
            idx = int(m["index"])
            coeffs[idx] = complex(m.get("re", 0.0), m.get("im", 0.0))
            nz = QuadratureNoise.from_db(m.get("v_minus_db", 0.0), m.get("v_plus_db", 0.0),
                                         m.get("angle", 0.0))
            if not nz.is_vacuum:
                noise[idx] = nz
        return cls(float(doc["n_photons"]), basis, coeffs, noise)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "BeamState":
        return cls.from_dict(json.loads(text))


def coherent_beam(n_photons: float, basis: Basis) -> BeamState:
    """Shot-noise-limited TEM00 beam with no encoded signal."""
    return BeamState(n_photons, basis)


def _add_to_signal(state: BeamState, delta: complex, mode: int = SIGNAL_MODE) -> BeamState:
    new = state.coefficient(mode) + delta
    size = max(abs(new.real), abs(new.imag))
    if size > FIRST_ORDER_LIMIT:
        raise ValueError(f"TEM{mode}0 amplitude {size:.3g} exceeds first-order limit "
                         f"{FIRST_ORDER_LIMIT}; small-modulation expansion invalid")
    if size > FIRST_ORDER_WARN:
        warnings.warn(f"TEM{mode}0 amplitude {size:.3g} above {FIRST_ORDER_WARN}; "
                      "second-order terms exceed 1%", FirstOrderWarning, stacklevel=3)
    coeffs = dict(state.coefficients)
    coeffs[mode] = new
    return replace(state, coefficients=coeffs)


def encode_displacement(state: BeamState, d: float) -> BeamState:
    """Displace the carrier by ``d`` metres: adds ``d / w`` to Re(c10)."""
    if not math.isfinite(d):
        raise ValueError("displacement must be finite")
    if d == 0:
        return state
    return _add_to_signal(state, complex(d / state.basis.waist, 0.0))


def encode_tilt(state: BeamState, theta: float) -> BeamState:
    """Tilt the carrier by ``theta`` radians: adds ``pi w theta / lambda`` to Im(c10)."""
    if not math.isfinite(theta):
        raise ValueError("tilt must be finite")
    if theta == 0:
        return state
    return _add_to_signal(state, complex(0.0, state.basis.tilt_coefficient * theta))


def pzt_modulation(state: BeamState, signal_power_db: float, tilt_fraction: float) -> BeamState:
    """Write a fixed tilt/displacement mixture of given total power onto TEM10.

    ``signal_power_db`` is the added homodyne signal power relative to the
    quantum noise limit: 0 dB puts an SNR-of-one signal on TEM10. A fraction
    ``tilt_fraction`` of that power goes to the tilt (Im) quadrature.
    """
    if not 0.0 <= tilt_fraction <= 1.0:
        raise ValueError(f"tilt_fraction must lie in [0, 1], got {tilt_fraction!r}")
    if math.isnan(signal_power_db) or signal_power_db == math.inf:
        raise ValueError(f"signal power must be a finite dB level, got {signal_power_db!r}")
    power = db_to_linear(signal_power_db) if signal_power_db != -math.inf else 0.0
    if power == 0.0:
        return state
    unit = 1.0 / (2.0 * math.sqrt(state.n_photons))
    delta = complex(math.sqrt((1.0 - tilt_fraction) * power) * unit,
                    math.sqrt(tilt_fraction * power) * unit)
    return _add_to_signal(state, delta)


def set_noise_mode_squeezing(state: BeamState, mode: int, v_minus_db: float, v_plus_db: float,
                             squeeze_angle: float = 0.0) -> BeamState:
    """Replace the noise of ``mode`` with the given squeezed/anti-squeezed pair (dB)."""
    try:
        nz = QuadratureNoise.from_db(v_minus_db, v_plus_db, squeeze_angle)
    except ValueError as exc:
        raise ValueError(f"({v_minus_db} dB, {v_plus_db} dB) rejected: {exc}") from None
    if not 0 <= mode <= state.basis.max_order:
        raise ValueError(f"mode index {mode} outside basis")
    noise = dict(state.noise)
    if nz.is_vacuum:
        noise.pop(mode, None)
    else:
        noise[mode] = nz
    return replace(state, noise=noise)


def lossy_variance(v: float, eta: float) -> float:
    """Beam-splitter loss on one quadrature variance: ``eta v + (1 - eta)``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta!r}")
    return eta * v + (1.0 - eta)


def apply_loss(noise: QuadratureNoise, eta: float) -> QuadratureNoise:
    """Mix ``noise`` with vacuum at transmission ``eta``."""
    return QuadratureNoise(lossy_variance(noise.v_minus, eta),
                           lossy_variance(noise.v_plus, eta), noise.angle)


def apply_loss_chain(noise: QuadratureNoise, etas) -> QuadratureNoise:
    for eta in etas:
        noise = apply_loss(noise, eta)
    return noise
