"""CSV / key=value writers for experiment results.

Schemas (all files have a header row, numbers use 9 significant digits):

    frames.csv   frame,user,rate_bps
    windows.csv  window,user,mean_rate_bps,gamma_bps,gap_bps,satisfied
    cdf.csv      rate_bps,fraction           (final-window user means)
    summary.txt  key=value lines
    profile_m<M>.csv  user,gamma_bps,achieved_mean_bps
    cdf_m<M>.csv      rate_bps,fraction
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import MissingSweepCell
from .metrics import empirical_cdf


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_frames_csv(result, path) -> Path:
    r = result.per_frame_rates
    k, t = r.shape
    return _write_csv(Path(path), ["frame", "user", "rate_bps"],
                      ((f, u, r[u, f]) for f in range(t) for u in range(k)))


def write_windows_csv(result, path) -> Path:
    gamma = result.qos.as_array()
    rows = ((w.window_index, u, w.mean_rate_bps[u], gamma[u], w.qos_gap_bps[u], w.satisfied[u])
            for w in result.window_reports for u in range(gamma.size))
    return _write_csv(Path(path), ["window", "user", "mean_rate_bps", "gamma_bps",
                                   "gap_bps", "satisfied"], rows)


def write_cdf_csv(values, path) -> Path:
    return _write_csv(Path(path), ["rate_bps", "fraction"], empirical_cdf(values))


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    path.write_text("".join(f"{key}={fmt(value)}\n" for key, value in summary.items()))
    return path


def write_bundle(result, out_dir, wall_clock_s: float | None = None) -> dict:
    """Write frames.csv, windows.csv, cdf.csv and summary.txt for one run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = result.summary()
    if wall_clock_s is not None:
        summary["wall_clock_s"] = wall_clock_s
    return {
        "frames": write_frames_csv(result, out / "frames.csv"),
        "windows": write_windows_csv(result, out / "windows.csv"),
        "cdf": write_cdf_csv(result.final_window_means(), out / "cdf.csv"),
        "summary": write_summary(summary, out / "summary.txt"),
    }


def emit_fig_bundle(results, out_dir, policy: str | None = None) -> list[Path]:
    """Per window size M: a QoS-profile CSV and a CDF CSV of final-window user means.

    ``achieved_mean_bps`` is the final-window mean averaged over seeds; the CDF
    pools the final-window means of every user and seed. Every M must have
    been run with the same seed set.
    """
    results = list(results)
    if not results:
        raise MissingSweepCell("no sweep results")
    policy = results[0].policy if policy is None else policy
    cells = {}
    for r in results:
        if r.policy == policy:
            cells.setdefault(r.window_frames, {})[r.seed] = r
    if not cells:
        raise MissingSweepCell(f"no results for policy {policy!r}")
    seed_sets = {m: frozenset(c) for m, c in cells.items()}
    all_seeds = frozenset().union(*seed_sets.values())
    for m, s in seed_sets.items():
        if s != all_seeds:
            missing = sorted(all_seeds - s)
            raise MissingSweepCell(f"M={m} lacks seeds {missing}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for m in sorted(cells):
        runs = [cells[m][s] for s in sorted(all_seeds)]
        gamma = runs[0].qos.as_array()
        finals = np.array([r.final_window_means() for r in runs])
        achieved = finals.mean(axis=0)
        written.append(_write_csv(out / f"profile_m{m}.csv",
                                  ["user", "gamma_bps", "achieved_mean_bps"],
                                  ((u, gamma[u], achieved[u]) for u in range(gamma.size))))
        written.append(write_cdf_csv(finals.ravel(), out / f"cdf_m{m}.csv"))
    return written
