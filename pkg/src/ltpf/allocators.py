"""Subcarrier assignment policies.

An allocation is an int array ``owner`` of length N: ``owner[n]`` is the user
that gets subcarrier ``n`` in this frame. Every policy gives each subcarrier
exactly one owner. Argmax ties go to the lowest user index, then the lowest
subcarrier index.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadWindow, InstanceTooLarge
from .phy import RateModel, frame_rates

BRUTEFORCE_LIMIT = 10 ** 6


@dataclass(frozen=True)
class AllocatorState:
    """Per-user bookkeeping carried between frames.

    ``running_mean_bps`` is the PFI denominator; it never drops below ``psi``.
    """

    running_mean_bps: np.ndarray
    window_cumulative_bps: np.ndarray
    frames_in_window: int
    total_cumulative_bps: np.ndarray
    psi: float

    @classmethod
    def initial(cls, num_users: int, psi: float) -> "AllocatorState":
        if not psi > 0:
            raise ValueError(f"psi must be positive, got {psi!r}")
        return cls(np.full(num_users, float(psi)), np.zeros(num_users), 0,
                   np.zeros(num_users), float(psi))


@dataclass(frozen=True)
class FrameOutcome:
    allocation: np.ndarray
    per_user_rate_bps: np.ndarray
    per_user_pfi: np.ndarray
    fallback: bool = False


def _outcome(gains, owner, state, model, fallback=False) -> FrameOutcome:
    rates = frame_rates(gains, owner, model)
    return FrameOutcome(owner, rates, rates / state.running_mean_bps, fallback)


# --- baselines ----------------------------------------------------------------

def allocate_max_rate(gains, model: RateModel) -> np.ndarray:
    """Each subcarrier to the user with the highest rate on it."""
    return np.argmax(model.rates(gains), axis=0)


def allocate_round_robin(frame_index: int, cfg) -> np.ndarray:
    """Channel-blind cyclic assignment ``owner[n] = (n + t N) mod K``."""
    k, n = cfg.num_users, cfg.num_subcarriers
    return (np.arange(n) + frame_index * n) % k


# --- instantaneous proportional fair -------------------------------------------

def allocate_pf_greedy(gains, state: AllocatorState, model: RateModel) -> FrameOutcome:
    """Per-subcarrier argmax of rate / running mean. ``state`` is not modified."""
    rates = model.rates(gains)
    owner = np.argmax(rates / state.running_mean_bps[:, None], axis=0)
    return _outcome(gains, owner, state, model)


def update_pf_mean(state: AllocatorState, last_frame_rates, pf_window: int) -> AllocatorState:
    """EWMA update of the running mean with window ``pf_window``, floored at psi."""
    if pf_window < 1:
        raise BadWindow(f"pf_window must be >= 1, got {pf_window!r}")
    r = np.asarray(last_frame_rates, dtype=float)
    beta = 1.0 / pf_window
    mean = (1.0 - beta) * state.running_mean_bps + beta * r
    return replace(state, running_mean_bps=np.maximum(mean, state.psi),
                   total_cumulative_bps=state.total_cumulative_bps + r)


def pf_product_metric(alloc, gains, state: AllocatorState, pf_window: int,
                      model: RateModel) -> float:
    """Product over users of ``1 + r_k / ((Δτ - 1) * mean_k)``; at least 1."""
    if pf_window < 2:
        raise BadWindow(f"product metric needs pf_window >= 2, got {pf_window!r}")
    rates = frame_rates(gains, alloc, model)
    factors = 1.0 + rates / ((pf_window - 1) * state.running_mean_bps)
    value = 1.0
    for f in factors:
        value *= f
    return float(value)


def allocate_pf_optimal_bruteforce(gains, state: AllocatorState, pf_window: int,
                                   model: RateModel, limit: int = BRUTEFORCE_LIMIT) -> np.ndarray:
    """Exhaustive maximiser of :func:`pf_product_metric` over all K^N allocations.

    Ties resolve to the lexicographically smallest owner vector. Only meant
    as a reference for small instances.
    """
    if pf_window < 2:
        raise BadWindow(f"product metric needs pf_window >= 2, got {pf_window!r}")
    g = np.asarray(gains, dtype=float)
    k, n = g.shape
    if k ** n > limit:
        raise InstanceTooLarge(f"K^N = {k}^{n} exceeds the brute-force limit {limit}")
    rates = model.rates(g)
    scale = (pf_window - 1) * state.running_mean_bps

    # Owner vectors enumerated in lexicographic order, chunked to bound memory.
    # Sums and products run in the same order as pf_product_metric, so the
    # values are bit-identical and a strict ">" keeps the smallest tied vector.
    best_val, best = -np.inf, None
    total = k ** n
    powers = k ** np.arange(n - 1, -1, -1)
    for start in range(0, total, 1 << 16):
        codes = np.arange(start, min(start + (1 << 16), total))
        owners = (codes[:, None] // powers) % k
        rows = np.arange(codes.size)
        user_rates = np.zeros((codes.size, k))
        for j in range(n):
            user_rates[rows, owners[:, j]] += rates[owners[:, j], j]
        factors = 1.0 + user_rates / scale
        vals = np.ones(codes.size)
        for u in range(k):
            vals *= factors[:, u]
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = vals[i], owners[i]
    return np.asarray(best, dtype=np.intp)


# --- long-term proportional fair -----------------------------------------------

def ltpf_initial_allocation(gains, psi: float, model: RateModel):
    """First-frame assignment that seeds the long-term loop.

    All running means start at ``psi``. Repeatedly hand the globally best
    (user, free subcarrier) pair by ``rate / running mean`` to its user, then
    lift that user's running mean to its accumulated frame rate (never below
    ``psi``). Returns ``(owner, state)`` with the state's running mean set to
    ``max(frame rate, psi)``.
    """
    if not psi > 0:
        raise ValueError(f"psi must be positive, got {psi!r}")
    rates = model.rates(gains)
    k, n = rates.shape
    wbar = np.full(k, float(psi))
    acc = np.zeros(k)
    owner = np.full(n, -1, dtype=np.intp)
    # working PFI matrix; assigned subcarriers are masked with -inf
    work = rates / wbar[:, None]
    for _ in range(n):
        # row-major flat argmax: lowest user first, then lowest subcarrier
        ku, sc = divmod(int(np.argmax(work)), n)
        owner[sc] = ku
        work[:, sc] = -np.inf
        acc[ku] += rates[ku, sc]
        wbar[ku] = max(acc[ku], psi)
        free = owner < 0
        work[ku, free] = rates[ku, free] / wbar[ku]
    # frame totals in subcarrier order so they match frame_rates exactly
    acc = frame_rates(gains, owner, model)
    state = AllocatorState(np.maximum(acc, psi), acc.copy(), 1, acc.copy(), float(psi))
    return owner, state


def ltpf_allocate_frame(gains, state: AllocatorState, qos, model: RateModel,
                        fallback: str = "max-rate", gating: str = "in-frame") -> FrameOutcome:
    """One frame of the long-term loop.

    A user is *unsatisfied* when its running window mean is below its target
    at the start of the frame. Only unsatisfied users compete; free
    subcarriers are handed out one (user, subcarrier) pair at a time, always
    the pair with the largest ``rate / running mean`` (means frozen for the
    frame), and each winner's in-frame rate accumulates.

    ``gating="in-frame"`` also closes a user for the rest of the frame once
    the rate accumulated so far would lift its window mean (this frame
    included) to its target; if every unsatisfied user closes early, the
    leftover subcarriers go back to the unsatisfied users by the same PFI
    rule. ``gating="frame-start"`` applies only the frame-start test, which
    reduces to a per-subcarrier argmax.

    When no user is unsatisfied the whole frame is filled by ``fallback``
    (``"max-rate"`` or ``"greedy-pf"``) and flagged.
    """
    gamma = qos.as_array() if hasattr(qos, "as_array") else np.asarray(qos, dtype=float)
    rates = model.rates(gains)
    unsatisfied = state.running_mean_bps < gamma
    if not unsatisfied.any():
        if fallback == "max-rate":
            owner = np.argmax(rates, axis=0)
        elif fallback == "greedy-pf":
            owner = np.argmax(rates / state.running_mean_bps[:, None], axis=0)
        else:
            raise ValueError(f"unknown fallback policy {fallback!r}")
        return _outcome(gains, owner, state, model, fallback=True)

    pfi = rates / state.running_mean_bps[:, None]
    pfi[~unsatisfied] = -np.inf
    if gating == "frame-start":
        return _outcome(gains, np.argmax(pfi, axis=0), state, model)
    if gating != "in-frame":
        raise ValueError(f"unknown gating mode {gating!r}")

    k, n = rates.shape
    # in-frame rate that brings the window mean, this frame counted, up to gamma
    need = gamma * (state.frames_in_window + 1) - state.window_cumulative_bps
    acc = np.zeros(k)
    owner = np.full(n, -1, dtype=np.intp)
    open_ = unsatisfied.copy()
    overflow = False
    work = pfi.copy()          # closed users' rows and taken columns masked with -inf
    for _ in range(n):
        if not overflow and not open_.any():
            # everyone met the target early: leftovers go back to the unsatisfied
            overflow = True
            work = pfi.copy()
            work[:, owner >= 0] = -np.inf
        # row-major flat argmax: lowest user first, then lowest subcarrier
        ku, sc = divmod(int(np.argmax(work)), n)
        owner[sc] = ku
        work[:, sc] = -np.inf
        acc[ku] += rates[ku, sc]
        if not overflow and acc[ku] >= need[ku]:
            open_[ku] = False
            work[ku] = -np.inf
    return _outcome(gains, owner, state, model)


def update_ltpf_mean(state: AllocatorState, frame_rates_bps,
                     frame_index_in_window: int | None = None) -> AllocatorState:
    """Fold one frame into the current window; running mean = window mean so far, floored at psi."""
    r = np.asarray(frame_rates_bps, dtype=float)
    frames = state.frames_in_window + 1 if frame_index_in_window is None else frame_index_in_window
    if frames < 1:
        raise BadWindow(f"frame index in window must be >= 1, got {frames!r}")
    cum = state.window_cumulative_bps + r
    return replace(state, running_mean_bps=np.maximum(cum / frames, state.psi),
                   window_cumulative_bps=cum, frames_in_window=frames,
                   total_cumulative_bps=state.total_cumulative_bps + r)


def close_window(state: AllocatorState):
    """End the current window: returns ``(window_mean, state)`` with accumulators reset
    and the running mean re-seeded from the floored window mean."""
    if state.frames_in_window < 1:
        raise BadWindow("cannot close an empty window")
    mean = state.window_cumulative_bps / state.frames_in_window
    return mean, replace(state, running_mean_bps=np.maximum(mean, state.psi),
                         window_cumulative_bps=np.zeros_like(mean), frames_in_window=0)


GATING_MODES = ("in-frame", "frame-start")
POLICIES = ("ltpf", "pf-greedy", "max-rate", "round-robin", "pf-optimal")
