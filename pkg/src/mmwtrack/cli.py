"""Command-line entry point.

Subcommands: trace (single tracking run), sweep (error vs target SNR),
sounder (synthetic capture -> PDPs -> blockage trace), selfcheck (fast
invariant suite).  Everything is driven by one YAML config; flags only pick
the config path, subcommand and output directory.  Every run writes a
manifest with the resolved config and derived constants so it can be
reproduced exactly.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from .blockage import synthesize_trace, write_trace
from .calib import mmwave_rate, sync_level, target_snr, to_db
from .config import ConfigError, ExperimentConfig, config_to_dict, load_config
from .channel import write_pathset_csv
from .evaluate import (
    build_realization,
    error_cdf,
    error_series,
    run_tracking,
    sweep_target_snr,
    write_cdf_csv,
    write_sweep_csv,
)
from .filters import filter_trace
from .kernels import backend_name
from .sounder import estimate_pdp, make_capture, trace_from_peaks, write_pdp_csv
from .syncsig import scan_schedule, sub_signal_energy, write_snr_csv


def _out_dir(exp: ExperimentConfig, override) -> str:
    path = override or os.environ.get("MMWTRACK_OUTPUT_DIR") or exp.output_dir
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(path, exp: ExperimentConfig, derived: dict) -> None:
    doc = {
        "tool": "mmwtrack",
        "version": __version__,
        "kernel_backend": backend_name(),
        "config": config_to_dict(exp),
        "derived": derived,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _targets(exp: ExperimentConfig):
    rate = mmwave_rate(exp.rate_profile)
    gamma_t = target_snr(exp.rate_profile, rate)
    return rate, gamma_t, sync_level(gamma_t, exp.rate_profile.n_tx)


def run_trace(exp: ExperimentConfig, out_dir: str) -> dict:
    """Track one direction with the first seed; write trace/CDF artifacts."""
    rate, gamma_t, sync_target = _targets(exp)
    seed = exp.seeds[0]
    real = build_realization(exp, seed)
    raw, true, beta = run_tracking(exp, real, sync_target)

    written = {}
    write_pathset_csv(real.state.pathset, os.path.join(out_dir, "pathset.csv"))
    written["pathset"] = "pathset.csv"
    write_snr_csv(true, os.path.join(out_dir, "trace_true.csv"))
    write_snr_csv(raw, os.path.join(out_dir, "trace_raw.csv"))
    written["true"] = "trace_true.csv"
    written["raw"] = "trace_raw.csv"
    cdf = error_cdf(error_series(true, raw, "db"), exp.cdf_points)
    write_cdf_csv(cdf, os.path.join(out_dir, "cdf_raw.csv"))
    for spec in exp.filters:
        filtered = filter_trace(raw, spec)
        name = f"trace_filtered_{spec.filter_id}.csv"
        write_snr_csv(filtered, os.path.join(out_dir, name))
        written[spec.filter_id] = name
        cdf = error_cdf(error_series(true, filtered, "db"), exp.cdf_points)
        write_cdf_csv(cdf, os.path.join(out_dir, f"cdf_{spec.filter_id}.csv"))

    n_aligned = len(raw.values)
    derived = {
        "seed": seed,
        "mmwave_rate_bps": rate,
        "gamma_t_linear": gamma_t,
        "gamma_t_db": to_db(gamma_t),
        "sync_target_linear": sync_target,
        "sync_target_db": to_db(sync_target),
        "beta": beta,
        "sub_signal_energy_j": sub_signal_energy(exp.ptx_w, exp.sync),
        "direction_index": real.direction_index,
        "measurement_period_s": exp.sync.measurement_period_s,
        "n_aligned_samples": n_aligned,
        "artifacts": written,
    }
    _write_manifest(os.path.join(out_dir, "run_manifest.json"), exp, derived)
    return derived


def run_sweep(exp: ExperimentConfig, out_dir: str) -> dict:
    result = sweep_target_snr(exp, _sweep_specs(exp), exp.target_grid_db, exp.seeds)
    write_sweep_csv(result, os.path.join(out_dir, "sweep_results.csv"))
    derived = {
        "targets_db": list(result.target_snr_db),
        "filter_ids": list(result.filter_ids),
        "n_seeds": result.n_seeds,
        "missing_cells": int(np.isnan(result.mean_err_db).sum()),
        "artifacts": {"sweep": "sweep_results.csv"},
    }
    _write_manifest(os.path.join(out_dir, "run_manifest.json"), exp, derived)
    return derived


def _sweep_specs(exp: ExperimentConfig):
    from .filters import FilterSpec

    specs = [FilterSpec(kind="none")]
    specs.extend(exp.filters)
    return tuple(specs)


def run_sounder_demo(exp: ExperimentConfig, out_dir: str) -> dict:
    """Synthesize a capture in segments, extract PDPs and the blockage trace.

    The capture is generated and processed segment by segment so a 10 s run
    never holds more than one segment in memory; per-block results do not
    depend on the segmentation because each averaging window is processed
    independently and PDPs ignore the segment-start phase.
    """
    cfg = exp.sounder
    n_symbols = round(exp.sounder_duration_s * cfg.sample_rate_hz / cfg.n_points)
    window = cfg.avg_symbols * cfg.decimation
    n_symbols -= n_symbols % window
    if n_symbols < window:
        raise ConfigError("sounder.duration_s too short for one decimated frame")

    envelope = None
    if exp.sounder_event_kind is not None:
        from .blockage import event_defaults

        env_spec = event_defaults(
            exp.sounder_event_kind,
            duration_s=n_symbols * cfg.symbol_period_s,
            sample_period_s=cfg.symbol_period_s,
            seed=exp.sounder_seed,
        )
        envelope = synthesize_trace(env_spec).samples[:n_symbols]

    seq_seed, noise_root = (
        int(s) for s in np.random.SeedSequence(exp.sounder_seed).generate_state(2)
    )
    peaks = []
    kept_frames = []
    pos = 0
    segment = 0
    while pos < n_symbols:
        seg_symbols = min(exp.segment_symbols, n_symbols - pos)
        env = None if envelope is None else envelope[pos : pos + seg_symbols]
        cap = make_capture(
            exp.sounder_taps,
            exp.sounder_cfo_hz,
            exp.sounder_snr_db,
            seg_symbols,
            cfg,
            seed=noise_root + segment,
            envelope=env,
            sequence_seed=seq_seed,
        )
        t0 = pos * cfg.symbol_period_s
        for frame in estimate_pdp(cap, cfg):
            peaks.append(float(np.max(frame.bins)))
            if len(kept_frames) < exp.pdp_csv_max_frames:
                kept_frames.append(
                    dataclasses.replace(frame, t=frame.t + t0)
                )
        pos += seg_symbols
        segment += 1

    trace = trace_from_peaks(
        peaks, cfg, label=exp.sounder_event_kind or "sounder"
    )
    trace_path = os.path.join(out_dir, "blockage_trace.csv")
    write_trace(trace, trace_path)
    write_pdp_csv(kept_frames, os.path.join(out_dir, "pdp.csv"))
    derived = {
        "n_symbols": n_symbols,
        "n_frames": len(peaks),
        "n_trace_samples": trace.samples.size,
        "trace_sample_period_s": trace.sample_period_s,
        "frame_period_s": cfg.frame_period_s,
        "artifacts": {"trace": "blockage_trace.csv", "pdp": "pdp.csv"},
    }
    _write_manifest(os.path.join(out_dir, "run_manifest.json"), exp, derived)
    return derived


def run_selfcheck(exp: ExperimentConfig) -> int:
    """Fast invariant subset; prints one line per check, returns #failures."""
    import math

    from .arrays import ArrayGeometry, beamforming_gain, steering_vector, uniform_codebook
    from .filters import FilterSpec, filter_trace as _ft
    from .syncsig import SnrTrace

    rng = np.random.default_rng(0)
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1

    geom = ArrayGeometry(4, 4)
    norms = [
        abs(np.linalg.norm(steering_vector(geom, a, e).weights) - 1.0)
        for a, e in rng.uniform(-math.pi, math.pi, (50, 2))
    ]
    check("steering vectors unit norm", max(norms) < 1e-12)

    gains = []
    for _ in range(50):
        vecs = [steering_vector(geom, rng.uniform(-math.pi, math.pi)) for _ in range(4)]
        gains.append(beamforming_gain(*vecs))
    check("beamforming gain within [0, 1]", all(0 <= g <= 1 + 1e-12 for g in gains))

    cb = uniform_codebook(geom, 16)
    spacing = np.diff(cb.azimuths)
    check("codebook spacing uniform", np.allclose(spacing, 2 * math.pi / 16))

    sched = scan_schedule(exp.sync, 0.1)
    dirs = [d for _, d in sched[: exp.sync.n_dir]]
    check("schedule covers every direction per cycle", sorted(dirs) == list(range(exp.sync.n_dir)))

    ok = True
    for _ in range(20):
        x = rng.standard_normal(100)
        t = np.arange(100.0)
        raw = SnrTrace(t=t, values=x, kind="raw")
        alpha, m = 0.3, 4
        fo = _ft(raw, FilterSpec(kind="first_order", alpha=alpha)).values
        ref = np.empty_like(x)
        ref[0] = x[0]
        for i in range(1, x.size):
            ref[i] = (1 - alpha) * ref[i - 1] + alpha * x[i]
        ok &= np.max(np.abs(fo - ref)) <= 1e-12
        ma = _ft(raw, FilterSpec(kind="moving_average", window_m=m)).values
        ref = np.array([x[max(0, i - m + 1) : i + 1].mean() for i in range(x.size)])
        ok &= np.max(np.abs(ma - ref)) <= 1e-12
    check("filter recursions match direct evaluation", ok)

    prof = exp.rate_profile
    rate = mmwave_rate(prof)
    gt = target_snr(prof, rate)
    lhs = prof.overhead_delta * prof.mmw_bw_hz * math.log2(1 + gt)
    check("Shannon target round-trips the rate", abs(lhs - rate) / rate < 1e-9)

    return failures


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mmwtrack",
        description="mmWave downlink SNR tracking simulations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("trace", "run one tracking experiment and write SNR trace CSVs"),
        ("sweep", "mean estimation error across a target-SNR grid"),
        ("sounder", "synthetic sounder capture -> PDPs -> blockage trace"),
        ("selfcheck", "run the fast invariant checks"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="YAML config path (defaults used if omitted)")
        if name != "selfcheck":
            p.add_argument("--output", help="output directory (overrides config)")
    args = parser.parse_args(argv)

    try:
        exp = load_config(args.config) if args.config else ExperimentConfig()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "selfcheck":
            return 1 if run_selfcheck(exp) else 0
        out_dir = _out_dir(exp, args.output)
        if args.command == "trace":
            derived = run_trace(exp, out_dir)
            print(
                f"trace: {derived['n_aligned_samples']} samples, "
                f"direction {derived['direction_index']}, beta {derived['beta']:.6g} "
                f"-> {out_dir}"
            )
        elif args.command == "sweep":
            derived = run_sweep(exp, out_dir)
            print(
                f"sweep: {len(derived['targets_db'])} targets x "
                f"{len(derived['filter_ids'])} filters, "
                f"{derived['missing_cells']} missing -> {out_dir}"
            )
        elif args.command == "sounder":
            derived = run_sounder_demo(exp, out_dir)
            print(
                f"sounder: {derived['n_frames']} frames -> "
                f"{derived['n_trace_samples']} trace samples at "
                f"{derived['trace_sample_period_s']:.6g} s -> {out_dir}"
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
