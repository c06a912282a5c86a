"""Invariant suites run by ``spatial-homodyne selftest``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import hg_modes
from .beam_state import BeamState, QuadratureNoise, apply_loss, encode_displacement
from .detection import SPLIT_DETECTOR_FACTOR, LocalOscillator, homodyne_expectation
from .hg_modes import Basis
from .radiometry import Trace, TraceConfig, qnl_displacement, simulate_homodyne_trace

GOLDEN_TRACE = "trace_seed1234.csv"


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def flipped_mode_profile(basis: Basis, n_points: int = 40001, span: float = 8.0) -> hg_modes.SampledProfile:
    """``sign(x) u_0(x)`` on a uniform grid with a node at the sign change."""
    x = np.linspace(-span * basis.waist, span * basis.waist, n_points)
    return hg_modes.SampledProfile(x, np.sign(x) * hg_modes.hg_amplitude(0, x, basis))


def split_overlap(basis: Basis) -> float:
    f = flipped_mode_profile(basis)
    u1 = hg_modes.mode_profile(1, basis, grid=f)
    return hg_modes.overlap(f, u1).real


def check_orthonormality(tol: float = 1e-8) -> CheckResult:
    basis = Basis(1.3e-4, 1.064e-6, 12)
    x, w = hg_modes.gauss_hermite_grid(basis)
    u = np.array([hg_modes.hg_amplitude(n, x, basis) for n in range(basis.max_order + 1)])
    gram = (u * w) @ u.T
    err = float(np.max(np.abs(gram - np.eye(len(u)))))
    return CheckResult("hg_orthonormality", err < tol, f"max |<u_m|u_n> - delta| = {err:.2e} (< {tol:g})")


def check_derivative_identity(tol: float = 1e-5) -> CheckResult:
    basis = Basis(1.0e-4, 1.0e-6)
    h = 1e-6 * basis.waist
    plus = hg_modes.displaced_profile(basis, d=h)
    minus = hg_modes.displaced_profile(basis, d=-h)
    fd = (plus.values - minus.values) / (2 * h)
    exact = hg_modes.derivative_profile("displacement", basis)
    diff = exact.with_values(fd - exact.values)
    err = diff.norm() / exact.norm()
    return CheckResult("derivative_identity", err < tol, f"relative L2 error {err:.2e} (< {tol:g})")


def check_displaced_coefficients(tol: float = 1e-8) -> CheckResult:
    basis = Basis(1.0e-4, 1.0e-6, 8)
    worst = 0.0
    for ratio in (1e-3, 1e-2, 0.2, 0.5):
        c = hg_modes.decompose(hg_modes.displaced_profile(basis, d=ratio * basis.waist), basis)
        closed = [math.exp(-ratio**2 / 2) * ratio**n / math.sqrt(math.factorial(n))
                  for n in range(basis.max_order + 1)]
        worst = max(worst, float(np.max(np.abs(c.coefficients - closed))))
    first_order_ok = True
    for ratio in (1e-4, 1e-3, 1e-2):
        c1 = hg_modes.decompose(hg_modes.displaced_profile(basis, d=ratio * basis.waist), basis)[1]
        first_order_ok &= abs(c1.real - ratio) <= ratio**3
    ok = worst < tol and first_order_ok
    return CheckResult("displaced_coefficients", ok,
                       f"closed-form error {worst:.2e} (< {tol:g}); |c1 - d/w| <= (d/w)^3: {first_order_ok}")


def check_loss_uncertainty() -> CheckResult:
    """Loss never raises a pure state's product and never makes a state unphysical."""
    etas = np.linspace(0.0, 1.0, 21)
    bad = 0
    for vm_db, vp_db in itertools.product((-10, -3.6, -2, 0), (0, 2, 3.6, 8, 10, 15)):
        if vm_db + vp_db < 0:
            continue
        nz = QuadratureNoise.from_db(vm_db, vp_db)
        before = nz.v_minus * nz.v_plus
        pure = vm_db + vp_db == 0
        for eta in etas:
            out = apply_loss(nz, float(eta))
            after = out.v_minus * out.v_plus
            bad += after < 1 - 1e-12
            bad += pure and after < before * (1 - 1e-12)
    return CheckResult("loss_uncertainty_product", bad == 0, f"{bad} violations on grid")


def check_loss_composition(tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for vm_db, vp_db in ((-3.6, 10.0), (-2.0, 8.0), (0.0, 0.0), (-12.0, 12.0)):
        nz = QuadratureNoise.from_db(vm_db, vp_db)
        for e1, e2 in itertools.product((0.0, 0.3, 0.8, 0.95, 1.0), repeat=2):
            a = apply_loss(apply_loss(nz, e2), e1)
            b = apply_loss(nz, e1 * e2)
            worst = max(worst, abs(a.v_minus - b.v_minus), abs(a.v_plus - b.v_plus))
    return CheckResult("loss_composition", worst < tol, f"max deviation {worst:.1e} (< {tol:g})")


def golden_config() -> TraceConfig:
    """Small fixed scenario whose trace is stored as the golden file."""
    basis = Basis(106e-6, 1.064e-6)
    n = 9.1e9
    state = encode_displacement(BeamState(n, basis), qnl_displacement(basis.waist, n))
    state = BeamState(n, basis, state.coefficients,
                      {1: QuadratureNoise.from_db(-2.0, 8.0)})
    return TraceConfig(state, LocalOscillator(1, 0.0), "scan", n_samples=64, seed=1234, n_average=10)


def check_trace_determinism(workers=(1, 2, 4)) -> CheckResult:
    cfg = golden_config()
    cfg = TraceConfig(cfg.state, cfg.lo, "locked", 0.0, n_samples=20_000, seed=7, n_average=3)
    traces = [simulate_homodyne_trace(cfg, workers=k).power_db for k in workers]
    same = all(np.array_equal(traces[0], t) for t in traces[1:])
    return CheckResult("trace_determinism", same, f"bit-identical across workers {list(workers)}: {same}")


def check_trace_golden() -> CheckResult:
    ref = resources.files(__package__).joinpath("golden", GOLDEN_TRACE)
    with resources.as_file(ref) as path:
        golden = Trace.from_csv(path)
    now = simulate_homodyne_trace(golden_config())
    same = np.array_equal(golden.power_db, now.power_db) and np.array_equal(golden.phi, now.phi)
    return CheckResult("trace_golden", same, f"seeded trace matches {GOLDEN_TRACE}: {same}")


def check_qnl_unit_snr(tol: float = 1e-12) -> CheckResult:
    basis = Basis(106e-6, 1.064e-6)
    n = 9.1e9
    state = encode_displacement(BeamState(n, basis), qnl_displacement(basis.waist, n))
    snr = homodyne_expectation(state, LocalOscillator(1, 0.0)).snr_power
    return CheckResult("qnl_unit_snr", abs(snr - 1) < tol, f"SNR at d_QNL = {snr:.15f}")


def check_split_factor(tol: float = 1e-6) -> CheckResult:
    numeric = split_overlap(Basis(1.0, 1.0))
    err = abs(numeric - SPLIT_DETECTOR_FACTOR)
    return CheckResult("split_factor", err < tol,
                       f"overlap(sign(x) u0, u1) = {numeric:.9f}, sqrt(2/pi) = {SPLIT_DETECTOR_FACTOR:.9f}")


CHECKS = (check_orthonormality, check_derivative_identity, check_displaced_coefficients,
          check_loss_uncertainty, check_loss_composition, check_trace_determinism,
          check_trace_golden, check_qnl_unit_snr, check_split_factor)


def run_all() -> list[CheckResult]:
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crashing suite is a failing suite
            results.append(CheckResult(check.__name__.removeprefix("check_"), False, f"error: {exc!r}"))
    return results
