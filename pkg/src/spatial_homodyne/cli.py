"""Command-line scenario runner.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure, 3 selftest failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as C
from .detection import homodyne_expectation, split_detector_expectation
from .radiometry import (fit_scan_envelope, min_detectable, photons_per_interval, qnl_displacement,
                         qnl_tilt, simulate_homodyne_trace, snr_report)
from .selftest import run_all

log = logging.getLogger("spatial_homodyne")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SELFTEST = 0, 1, 2, 3

# Reference traces drawn for every acquisition, as (label, with_signal, with_noise).
TRACE_VARIANTS = (("qnl", False, False), ("sqz", False, True), ("mod", True, False), ("modsqz", True, True))

PLOT_SCRIPT = '''\
"""Plot traces written by `spatial-homodyne trace`. Run: python {name}"""
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "{prefix}_*.csv"))):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    scan = "_scan_" in os.path.basename(path)
    x = [float(r["phi_rad"] if scan else r["index"]) for r in rows]
    y = [float(r["power_db"]) for r in rows]
    plt.figure("scan" if scan else os.path.basename(path).rsplit("_", 1)[0])
    plt.plot(x, y, lw=0.6, label=os.path.basename(path))
for num in plt.get_fignums():
    fig = plt.figure(num)
    ax = fig.gca()
    ax.set_ylabel("power relative to QNL (dB)")
    ax.set_xlabel("LO phase (rad)" if fig.get_label() == "scan" else "sample")
    ax.legend(fontsize=7)
plt.show()
'''


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _echo(cfg: C.ScenarioConfig) -> dict:
    return cfg.model_dump(mode="json")


def _write_json(path: Path, doc: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def cmd_qnl(cfg: C.ScenarioConfig) -> dict:
    """Photon number, displacement/tilt QNL and the video-averaged minimum for ``cfg``."""
    params = C.radiometry(cfg)
    n = photons_per_interval(params)
    w = cfg.basis.waist_m
    lam = cfg.radiometry.wavelength_m
    d_qnl = qnl_displacement(w, n)
    t_qnl = qnl_tilt(w, lam, n)
    state = C.build_state(cfg)
    readings = [snr_report(state, C.local_oscillator(cfg, C.phase_from_pi(f)), params,
                           cfg.measured_level_db)
                for f in cfg.detector.locked_phases_pi]
    return {"command": "qnl", "config": _echo(cfg),
            "n_photons": n, "d_qnl_m": d_qnl, "theta_qnl_rad": t_qnl,
            "d_min_m": min_detectable(d_qnl, params.rbw, params.vbw),
            "theta_min_rad": min_detectable(t_qnl, params.rbw, params.vbw),
            "n_average": params.n_average, "readings": readings}


def _trace_jobs(cfg: C.ScenarioConfig):
    jobs = []
    if cfg.detector.scan:
        jobs.append(("scan", "scan", 0.0))
    for f in cfg.detector.locked_phases_pi:
        jobs.append((f"locked_{f:g}pi", "locked", C.phase_from_pi(f)))
    return jobs


def cmd_trace(cfg: C.ScenarioConfig, workers: int = 1) -> dict:
    """Simulate scan and locked traces (QNL, SQZ, MOD, MOD-SQZ) and write them as CSV."""
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = _trace_jobs(cfg)
    seeds = np.random.SeedSequence(cfg.trace.seed).generate_state(len(jobs) * len(TRACE_VARIANTS))
    summary, k = {}, 0
    for tag, mode, phase in jobs:
        entry = {"mode": mode, "phase_rad": phase, "files": {}, "level_db": {}}
        traces = {}
        for label, with_signal, with_noise in TRACE_VARIANTS:
            state = C.build_state(cfg, with_signal, with_noise)
            tc = C.trace_config(cfg, state, mode, phase, seed=int(seeds[k]))
            k += 1
            tr = simulate_homodyne_trace(tc, workers=workers)
            path = tr.to_csv(out / f"{cfg.output.prefix}_{tag}_{label}.csv")
            traces[label] = tr
            entry["files"][label] = path.name
            entry["level_db"][label] = tr.level_db()
        if mode == "scan":
            entry["fit_modsqz"] = fit_scan_envelope(traces["modsqz"].phi, traces["modsqz"].power_db,
                                                    traces["sqz"].power_db)
            entry["fit_mod"] = fit_scan_envelope(traces["mod"].phi, traces["mod"].power_db,
                                                 traces["qnl"].power_db)
            entry["fit_sqz"] = fit_scan_envelope(traces["sqz"].phi, traces["sqz"].power_db)
        summary[tag] = entry
    script = out / f"plot_{cfg.output.prefix}.py"
    script.write_text(PLOT_SCRIPT.format(name=script.name, prefix=cfg.output.prefix))
    return {"command": "trace", "config": _echo(cfg), "traces": summary, "plot_script": script.name}


def cmd_compare_detectors(cfg: C.ScenarioConfig) -> dict:
    """Homodyne (LO phase 0) and split-detector readings of the same beam."""
    state = C.build_state(cfg)
    hom = homodyne_expectation(state, C.local_oscillator(cfg, 0.0))
    split = split_detector_expectation(state)
    ratio = split.snr_amplitude / hom.snr_amplitude if hom.signal_mean else None
    return {"command": "compare-detectors", "config": _echo(cfg),
            "homodyne": hom.to_dict(), "split": split.to_dict(),
            "amplitude_snr_ratio_split_over_homodyne": ratio,
            "homodyne_advantage": 1.0 / ratio if ratio else None}


def cmd_selftest() -> tuple[bool, list[str]]:
    results = run_all()
    return all(r.passed for r in results), [r.line() for r in results]


def _print_summary(report: dict) -> None:
    cmd = report["command"]
    if cmd == "qnl":
        print(f"N per interval : {report['n_photons']:.4e}")
        print(f"d_QNL          : {report['d_qnl_m'] * 1e9:.4f} nm")
        print(f"theta_QNL      : {report['theta_qnl_rad']:.4e} rad")
        print(f"d_min (VBW)    : {report['d_min_m'] * 1e12:.3f} pm")
        for r in report["readings"]:
            print(f"  LO phase {r['lo']['phase_rad']:.4f}: noise {r['noise_level_db']:+.2f} dB, "
                  f"min displacement {r['min_displacement_m'] * 1e9:.4f} nm, "
                  f"SNR {r['outcome']['snr_db'] if r['outcome']['snr_db'] is not None else '-inf'} dB")
    elif cmd == "trace":
        for tag, e in report["traces"].items():
            levels = ", ".join(f"{k} {v:+.2f} dB" for k, v in e["level_db"].items())
            print(f"{tag}: {levels}")
            if "fit_modsqz" in e:
                print(f"  fitted tilt fraction {e['fit_modsqz']['tilt_fraction']:.4f}")
    elif cmd == "compare-detectors":
        print(f"homodyne SNR amplitude ratio split/homodyne: {report['amplitude_snr_ratio_split_over_homodyne']}")
        print(f"homodyne advantage: {report['homodyne_advantage']}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spatial-homodyne",
                                description="Displacement/tilt measurement with spatial homodyne detection.")
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, help_ in (("qnl", "quantum noise limit table"),
                        ("trace", "simulate scanned and locked spectrum-analyser traces"),
                        ("compare-detectors", "homodyne vs split detector")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True,
                       help="scenario JSON file, or a bundled name: " + ", ".join(C.BUNDLED))
        s.add_argument("--seed", type=int, default=None, help="override trace.seed")
        s.add_argument("--out", default=None, help="override output.dir")
        if name == "trace":
            s.add_argument("--workers", type=int, default=1)
    sub.add_parser("selftest", help="run the invariant suites")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.cmd == "selftest":
        ok, lines = cmd_selftest()
        print("\n".join(lines))
        return EXIT_OK if ok else EXIT_SELFTEST
    try:
        cfg = C.with_overrides(C.load_config(args.config), args.seed, args.out)
        if args.cmd == "qnl":
            report = cmd_qnl(cfg)
        elif args.cmd == "trace":
            report = cmd_trace(cfg, workers=args.workers)
        else:
            report = cmd_compare_detectors(cfg)
        path = Path(cfg.output.dir) / f"{cfg.output.prefix}_{args.cmd.replace('-', '_')}.json"
        _write_json(path, _clean(report))
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    _print_summary(report)
    log.info("report written to %s", path)
    return EXIT_OK


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _finite(obj)


if __name__ == "__main__":
    sys.exit(main())
