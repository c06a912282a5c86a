"""One-dimensional Hermite-Gauss mode algebra.

Conventions
-----------
``w`` is the field 1/e half-width of the fundamental mode, so the intensity
of TEM00 falls as ``exp(-2 x**2 / w**2)``. Modes are L2-normalised on the
real line::

    u_0(x) = (2 / (pi w**2))**(1/4) exp(-x**2 / w**2)
    u_1(x) = (2 / (pi w**2))**(1/4) (2 x / w) exp(-x**2 / w**2)

With this choice a beam displaced by ``+d`` gains ``+d/w`` of TEM10
(``u_1 = -w du_0/dx``) and a beam tilted by ``theta`` gains
``i pi w theta / lambda`` of TEM10.

Overlaps use the quadrature weights carried by a :class:`SampledProfile`.
Profiles built on :func:`gauss_hermite_grid` integrate products of modes
exactly up to polynomial degree ``2 * n_nodes - 1``; profiles on arbitrary
grids fall back to the composite trapezoid rule.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.special import roots_hermite

DEFAULT_NODES = 128
DEFAULT_MAX_ORDER = 8
QUADRATURE_TOL = 1e-8
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class Basis:
    """Hermite-Gauss frame: waist (m), wavelength (m) and truncation order."""

    waist: float
    wavelength: float
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if not (math.isfinite(self.waist) and self.waist > 0):
            raise ValueError(f"waist must be positive, got {self.waist!r}")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if int(self.max_order) != self.max_order or self.max_order < 1:
            raise ValueError(f"max_order must be an integer >= 1, got {self.max_order!r}")

    @property
    def tilt_coefficient(self) -> float:
        """TEM10 coefficient per radian of tilt, ``pi w / lambda``."""
        return math.pi * self.waist / self.wavelength


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Complex 1-D field sampled on a strictly increasing grid.

    ``weights`` are the quadrature weights for ``integral f(x) dx`` on this
    grid. When omitted, trapezoid weights are derived from ``x``.
    """

    x: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if x.ndim != 1 or values.shape != x.shape:
            raise ValueError("x and values must be 1-D arrays of equal length")
        if x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(values))):
            raise ValueError("profile contains non-finite values")
        weights = _trapezoid_weights(x) if self.weights is None else np.asarray(self.weights, dtype=float)
        if weights.shape != x.shape:
            raise ValueError("weights must match the grid")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.weights * np.abs(self.values) ** 2)))

    def with_values(self, values) -> "SampledProfile":
        return SampledProfile(self.x, values, self.weights)

    def same_grid(self, other: "SampledProfile") -> bool:
        return self.x.shape == other.x.shape and np.array_equal(self.x, other.x)


@dataclass(frozen=True, eq=False)
class ModeCoefficients:
    """Complex amplitudes ``c_n`` for ``n = 0..basis.max_order``."""

    coefficients: np.ndarray
    basis: Basis
    residual: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.basis.max_order + 1,):
            raise ValueError("need exactly max_order + 1 coefficients")
        if float(np.sum(np.abs(c) ** 2)) > 1 + QUADRATURE_TOL:
            raise ValueError("coefficient power exceeds unity; truncation cannot gain norm")
        object.__setattr__(self, "coefficients", c)

    def __getitem__(self, n: int) -> complex:
        return complex(self.coefficients[n])

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def captured_power(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def _normalization(waist: float) -> float:
    return (2.0 / (math.pi * waist**2)) ** 0.25


def _hermite_functions(n_max: int, x: np.ndarray, waist: float) -> np.ndarray:
    """Rows ``u_0..u_{n_max}`` evaluated on ``x`` (stable three-term recurrence)."""
    y = math.sqrt(2.0) * np.asarray(x, dtype=float) / waist
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = _normalization(waist) * np.exp(-(y**2) / 2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hg_amplitude(n: int, x, basis: Basis):
    """Real amplitude of the normalised TEM_n0 mode at position ``x`` (m^-1/2).

    Accepts a scalar or array ``x``; returns the same shape.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"mode index must be a non-negative integer, got {n!r}")
    if n > basis.max_order:
        raise ValueError(f"mode index {n} exceeds basis max_order {basis.max_order}")
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("positions must be finite")
    vals = _hermite_functions(int(n), xa, basis.waist)[int(n)]
    return float(vals) if np.ndim(x) == 0 else vals


def gauss_hermite_grid(basis: Basis, n_nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes scaled to the waist, with weights for plain ``dx`` integrals.

    Nodes sit at ``x = w y / sqrt(2)`` where ``y`` are the physicists'
    Hermite roots, so products ``u_m u_n`` are integrated exactly.
    """
    y, wts = roots_hermite(n_nodes)
    scale = basis.waist / math.sqrt(2.0)
    return scale * y, scale * wts * np.exp(y**2)


def mode_profile(n: int, basis: Basis, grid: SampledProfile | None = None,
                 n_nodes: int = DEFAULT_NODES) -> SampledProfile:
    """TEM_n0 sampled on ``grid``'s positions, or on the default Gauss-Hermite grid."""
    if grid is None:
        x, w = gauss_hermite_grid(basis, n_nodes)
    else:
        x, w = grid.x, grid.weights
    return SampledProfile(x, hg_amplitude(n, x, basis), w)


def overlap(f: SampledProfile, g: SampledProfile, resample: bool = False) -> complex:
    """Inner product ``integral conj(f(x)) g(x) dx`` using ``f``'s quadrature weights.

    Profiles must share a grid. With ``resample=True``, ``g`` is linearly
    interpolated onto ``f``'s grid (zero outside its support) instead.
    """
    if f.same_grid(g):
        gv = g.values
    elif resample:
        gv = (np.interp(f.x, g.x, g.values.real, left=0.0, right=0.0)
              + 1j * np.interp(f.x, g.x, g.values.imag, left=0.0, right=0.0))
    else:
        raise ValueError("profiles are sampled on different grids; pass resample=True to interpolate")
    return complex(np.sum(f.weights * np.conj(f.values) * gv))


def decompose(profile: SampledProfile, basis: Basis) -> ModeCoefficients:
    """Project a normalised profile onto TEM_00..TEM_{max_order}0.

    The residual ``1 - sum |c_n|**2`` is the power left outside the
    truncated basis.
    """
    norm2 = profile.norm() ** 2
    if abs(norm2 - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"profile is not normalised (|u|^2 integrates to {norm2:.9g})")
    modes = _hermite_functions(basis.max_order, profile.x, basis.waist)
    c = modes @ (profile.weights * profile.values)
    residual = 1.0 - float(np.sum(np.abs(c) ** 2))
    return ModeCoefficients(c, basis, residual)


def displaced_profile(basis: Basis, d: float = 0.0, theta: float = 0.0,
                      n_nodes: int = DEFAULT_NODES, x=None) -> SampledProfile:
    """Exact TEM00 displaced by ``d`` (m) and tilted by ``theta`` (rad).

    The tilt is the linear phase ``exp(i 2 pi theta x / lambda)`` across
    the detection plane.
    """
    if x is None:
        x, w = gauss_hermite_grid(basis, n_nodes)
    else:
        x, w = np.asarray(x, dtype=float), None
    k = 2 * math.pi / basis.wavelength
    vals = (_normalization(basis.waist) * np.exp(-((x - d) ** 2) / basis.waist**2)
            * np.exp(1j * k * theta * x))
    return SampledProfile(x, vals, w)


def derivative_profile(parameter: Literal["displacement", "tilt"], basis: Basis,
                       n_nodes: int = DEFAULT_NODES) -> SampledProfile:
    """Derivative of TEM00 with respect to displacement or tilt at zero.

    ``displacement`` gives ``u_1 / w``; ``tilt`` gives ``i (pi w / lambda) u_1``.
    """
    x, w = gauss_hermite_grid(basis, n_nodes)
    u0 = _normalization(basis.waist) * np.exp(-(x**2) / basis.waist**2)
    if parameter == "displacement":
        vals = (2 * x / basis.waist**2) * u0
    elif parameter == "tilt":
        vals = 1j * (2 * math.pi / basis.wavelength) * x * u0
    else:
        raise ValueError(f"parameter must be 'displacement' or 'tilt', got {parameter!r}")
    return SampledProfile(x, vals, w)


def read_profile_csv(path) -> SampledProfile:
    """Load a profile from CSV with header; columns ``x, re`` or ``x, re, im``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ValueError(f"{path}: need a header and at least two rows")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.shape[1] == 2:
        values = data[:, 1].astype(complex)
    elif data.shape[1] == 3:
        values = data[:, 1] + 1j * data[:, 2]
    else:
        raise ValueError(f"{path}: expected 2 or 3 columns, got {data.shape[1]}")
    return SampledProfile(data[:, 0], values)


def write_profile_csv(profile: SampledProfile, path) -> Path:
    """Write ``x, re, im`` columns; imaginary column dropped if identically zero."""
    path = Path(path)
    real_only = not np.any(profile.values.imag)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x_m", "re"] if real_only else ["x_m", "re", "im"])
        for x, v in zip(profile.x, profile.values):
            row = [repr(float(x)), repr(float(v.real))]
            if not real_only:
                row.append(repr(float(v.imag)))
            wr.writerow(row)
    return path
