"""Command-line front end.

Single run::

    ltpf-sim --config table1.cfg --policy ltpf --m 10 --seed 7 --out results/

Sweep over policies, window sizes and seeds with a fixed total frame budget::

    ltpf-sim --config table1.cfg --sweep --m 1 --m 4 --m 10 --seed 1 --seed 2 --out sweep/
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .allocators import POLICIES
from .channel import channel_new, write_gain_trace
from .config import load_config, validate_config
from .engine import run_experiment, run_sweep
from .errors import LtpfError
from .output import emit_fig_bundle, fmt, write_bundle, write_summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltpf-sim", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, metavar="PATH",
                   help="key=value config file (the bundled table1.cfg is found by name)")
    p.add_argument("--policy", action="append", choices=POLICIES,
                   help="allocator; repeat with --sweep to compare several (default ltpf)")
    p.add_argument("--m", action="append", type=int, metavar="INT",
                   help="frames per allocation window; repeatable with --sweep")
    p.add_argument("--windows", type=int, metavar="INT", help="number of windows to simulate")
    p.add_argument("--seed", action="append", type=int, metavar="INT",
                   help="RNG seed; repeatable with --sweep")
    p.add_argument("--sweep", action="store_true",
                   help="run every (policy, M, seed) combination")
    p.add_argument("--total-frames", type=int, metavar="INT",
                   help="frame budget shared by every M in a sweep (default window_frames*num_windows)")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep cells")
    p.add_argument("--out", default="results", metavar="DIR", help="output directory")
    p.add_argument("--dump-gains", action="store_true",
                   help="also write gains.csv with the per-frame channel amplitudes")
    return p


def _print_table(rows) -> None:
    cols = ["policy", "window_frames", "seed", "qos_deviation", "profile_correlation",
            "jain_index", "fallback_events", "mean_system_rate_bps"]
    table = [cols] + [[fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for row in table:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)))


def _single(cfg, qos, args, out: Path) -> None:
    policy = (args.policy or ["ltpf"])[0]
    seed = args.seed[0] if args.seed else cfg.rng_seed
    t0 = time.perf_counter()
    result = run_experiment(cfg, qos, policy, seed)
    elapsed = time.perf_counter() - t0
    write_bundle(result, out, wall_clock_s=elapsed)
    if args.dump_gains:
        chan = channel_new(validate_config(cfg, qos), seed)
        write_gain_trace(out / "gains.csv", (chan.step() for _ in range(cfg.num_frames)))
    _print_table([result.summary()])


def _sweep(cfg, qos, args, out: Path) -> None:
    policies = args.policy or ["ltpf"]
    t0 = time.perf_counter()
    results = run_sweep(cfg, qos, policies, args.m, args.seed,
                        total_frames=args.total_frames, workers=args.workers)
    elapsed = time.perf_counter() - t0
    rows = []
    for r in results:
        write_bundle(r, out / f"{r.policy}_m{r.window_frames}_s{r.seed}")
        rows.append(r.summary())
    for policy in dict.fromkeys(policies):
        emit_fig_bundle(results, out / "fig" / policy, policy)
    write_summary({"cells": len(results), "wall_clock_s": elapsed}, out / "summary.txt")
    if args.dump_gains:
        vcfg = validate_config(cfg, qos)
        for seed in dict.fromkeys(args.seed or [cfg.rng_seed]):
            chan = channel_new(vcfg, seed)
            frames = results[0].per_frame_rates.shape[1]
            write_gain_trace(out / f"gains_s{seed}.csv", (chan.step() for _ in range(frames)))
    _print_table(rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, qos = load_config(args.config)
        if args.sweep:
            if args.total_frames is None:
                args.total_frames = cfg.window_frames * (args.windows or cfg.num_windows)
        else:
            overrides = {"window_frames": args.m[0] if args.m else None,
                         "num_windows": args.windows}
            cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
        validate_config(cfg, qos)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.sweep:
            _sweep(cfg, qos, args, out)
        else:
            _single(cfg, qos, args, out)
    except (LtpfError, OSError) as exc:
        print(f"ltpf-sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
