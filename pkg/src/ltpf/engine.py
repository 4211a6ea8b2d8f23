"""Experiment driver: channel -> allocator -> state update, frame by frame."""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import allocators as al
from .channel import channel_new
from .config import QoSProfile, ValidatedConfig, validate_config
from .errors import BadPartition, BadWindow, InstanceTooLarge, NonPositiveRate
from .metrics import (WindowReport, jain_index, log_pf_objective, pearson,
                      qos_deviation, window_means)
from .phy import frame_rates


@dataclass
class ExperimentResult:
    policy: str
    per_frame_rates: np.ndarray          # K x T, bit/s
    allocations: np.ndarray              # T x N owner table
    window_reports: list
    config: ValidatedConfig
    seed: int
    fallback_frames: np.ndarray          # T booleans
    gain_trace: list | None = field(default=None, repr=False)

    @property
    def qos(self) -> QoSProfile:
        return self.config.qos

    @property
    def window_frames(self) -> int:
        return self.config.window_frames

    def window_mean_matrix(self) -> np.ndarray:
        """num_windows x K matrix of window means."""
        return np.array([w.mean_rate_bps for w in self.window_reports])

    def final_window_means(self) -> np.ndarray:
        return self.window_reports[-1].mean_rate_bps

    def mean_qos_deviation(self) -> float:
        """QoS deviation of each window's means, averaged over windows."""
        return float(np.mean([qos_deviation(w.mean_rate_bps, self.qos)
                              for w in self.window_reports]))

    def profile_correlation(self) -> float:
        """Pearson r between the final-window means and the QoS targets."""
        return pearson(self.final_window_means(), self.qos.as_array())

    def summary(self) -> dict:
        overall = self.per_frame_rates.mean(axis=1)
        try:
            logpf = log_pf_objective(overall)
        except NonPositiveRate:
            logpf = float("-inf")
        try:
            jain = jain_index(overall)
        except ValueError:
            jain = float("nan")
        return {
            "policy": self.policy,
            "window_frames": self.config.window_frames,
            "num_windows": self.config.num_windows,
            "seed": self.seed,
            "qos_deviation": self.mean_qos_deviation(),
            "final_qos_deviation": qos_deviation(self.final_window_means(), self.qos),
            "profile_correlation": self.profile_correlation(),
            "jain_index": jain,
            "log_pf_objective": logpf,
            "fallback_events": int(self.fallback_frames.sum()),
            "mean_system_rate_bps": float(self.per_frame_rates.sum(axis=0).mean()),
        }


def _check_policy(vcfg: ValidatedConfig, policy: str) -> None:
    if policy not in al.POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {', '.join(al.POLICIES)}")
    if policy == "pf-optimal":
        k, n = vcfg.num_users, vcfg.num_subcarriers
        if k ** n > al.BRUTEFORCE_LIMIT:
            raise InstanceTooLarge(
                f"pf-optimal enumerates K^N = {k}^{n} allocations; limit is {al.BRUTEFORCE_LIMIT}")
        if vcfg.pf_window < 2:
            raise BadWindow("pf-optimal needs pf_window >= 2")


def run_experiment(cfg, qos=None, policy: str = "ltpf", seed=None,
                   record_gains: bool = False) -> ExperimentResult:
    """Simulate ``num_windows`` allocation windows of ``window_frames`` frames each.

    All policies draw the same gain sequence for a given seed.
    """
    vcfg = validate_config(cfg, qos)
    _check_policy(vcfg, policy)
    seed = vcfg.rng_seed if seed is None else int(seed)
    k, n, m = vcfg.num_users, vcfg.num_subcarriers, vcfg.window_frames
    total = vcfg.num_frames
    model = vcfg.rate_model
    psi = vcfg.psi_init
    chan = channel_new(vcfg, seed)

    rates = np.zeros((k, total))
    owners = np.zeros((total, n), dtype=np.intp)
    fallback = np.zeros(total, dtype=bool)
    trace = [] if record_gains else None
    state = al.AllocatorState.initial(k, psi)

    for t in range(total):
        g = chan.step()
        if trace is not None:
            trace.append(g.copy())

        if policy == "ltpf":
            if t == 0:
                owner, state = al.ltpf_initial_allocation(g, psi, model)
                r = state.window_cumulative_bps.copy()
            else:
                out = al.ltpf_allocate_frame(g, state, vcfg.qos, model,
                                             vcfg.fallback_policy, vcfg.ltpf_gating)
                owner, r = out.allocation, out.per_user_rate_bps
                fallback[t] = out.fallback
                state = al.update_ltpf_mean(state, r, state.frames_in_window + 1)
            if state.frames_in_window == m:
                _, state = al.close_window(state)
        elif policy == "pf-greedy":
            out = al.allocate_pf_greedy(g, state, model)
            owner, r = out.allocation, out.per_user_rate_bps
            state = al.update_pf_mean(state, r, vcfg.pf_window)
        elif policy == "pf-optimal":
            owner = al.allocate_pf_optimal_bruteforce(g, state, vcfg.pf_window, model)
            r = frame_rates(g, owner, model)
            state = al.update_pf_mean(state, r, vcfg.pf_window)
        elif policy == "max-rate":
            owner = al.allocate_max_rate(g, model)
            r = frame_rates(g, owner, model)
        else:  # round-robin
            owner = al.allocate_round_robin(t, vcfg)
            r = frame_rates(g, owner, model)

        owners[t] = owner
        rates[:, t] = r

    means = window_means(rates, m)
    fb = fallback.reshape(-1, m).sum(axis=1)
    reports = [WindowReport.build(w, means[:, w], vcfg.qos, fb[w])
               for w in range(vcfg.num_windows)]
    return ExperimentResult(policy, rates, owners, reports, vcfg, seed, fallback, trace)


def gain_sequence_digest(cfg, qos=None, seed=None, frames=None) -> str:
    """SHA-256 of the raw gain sequence a run with this config and seed consumes."""
    vcfg = validate_config(cfg, qos)
    chan = channel_new(vcfg, vcfg.rng_seed if seed is None else seed)
    h = hashlib.sha256()
    for _ in range(vcfg.num_frames if frames is None else frames):
        h.update(np.ascontiguousarray(chan.step()).tobytes())
    return h.hexdigest()


def _run_cell(args):
    cfg, qos, policy, seed = args
    return run_experiment(cfg, qos, policy, seed)


def run_sweep(cfg, qos=None, policies=("ltpf",), m_values=None, seeds=None,
              total_frames: int | None = None, workers: int = 1) -> list:
    """Run every (policy, M, seed) cell, in that nesting order.

    Each M gets ``total_frames // M`` windows so all cells simulate the same
    frames; ``total_frames`` defaults to the config's ``window_frames * num_windows``.
    """
    vcfg = validate_config(cfg, qos)
    base = vcfg.config
    policies = list(policies)
    m_values = [base.window_frames] if m_values is None else list(m_values)
    seeds = [base.rng_seed] if seeds is None else list(seeds)
    if not (policies and m_values and seeds):
        raise ValueError("policies, m_values and seeds must be nonempty")
    total = base.num_frames if total_frames is None else int(total_frames)

    cells = []
    for policy in policies:
        for m in m_values:
            if m < 1 or total % m:
                raise BadPartition(f"{total} frames cannot be split into windows of {m}")
            cfg_m = validate_config(replace(base, window_frames=m, num_windows=total // m),
                                    vcfg.qos)
            _check_policy(cfg_m, policy)
            cells.extend((cfg_m, None, policy, s) for s in seeds)

    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(c) for c in cells]


def calibrate_qos_profile(cfg, seed=0, frames: int = 200, low: float = 0.5,
                          high: float = 2.0) -> QoSProfile:
    """Heterogeneous QoS targets spaced linearly from ``low`` to ``high`` times the equal share.

    The equal share is the mean max-rate system throughput over ``frames``
    frames divided by K.
    """
    base = cfg.config if isinstance(cfg, ValidatedConfig) else cfg
    probe = replace(base, window_frames=1, num_windows=frames)
    dummy = QoSProfile((1.0,) * base.num_users)
    res = run_experiment(probe, dummy, "max-rate", seed)
    share = float(res.per_frame_rates.sum(axis=0).mean()) / base.num_users
    return QoSProfile(tuple(np.linspace(low, high, base.num_users) * share))
