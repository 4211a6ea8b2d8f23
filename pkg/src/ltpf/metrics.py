"""Reported quantities: QoS-profile following, fairness, CDFs and window statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AllZero, BadPartition, EmptyInput, LengthMismatch,
                     NonPositiveRate)

DEFAULT_EPSILON = 0.05


def _gamma(qos) -> np.ndarray:
    return qos.as_array() if hasattr(qos, "as_array") else np.asarray(qos, dtype=float)


@dataclass(frozen=True)
class WindowReport:
    window_index: int
    mean_rate_bps: np.ndarray
    qos_gap_bps: np.ndarray
    satisfied: np.ndarray
    fallback_events: int = 0

    @classmethod
    def build(cls, window_index, mean_rates, qos, fallback_events=0) -> "WindowReport":
        means = np.asarray(mean_rates, dtype=float)
        gap = _gamma(qos) - means
        return cls(window_index, means, gap, gap <= 0, int(fallback_events))


def qos_deviation(mean_rates, qos) -> float:
    """Mean absolute relative deviation ``mean_k |γ_k - rate_k| / γ_k``."""
    x = np.asarray(mean_rates, dtype=float)
    g = _gamma(qos)
    if x.shape != g.shape:
        raise LengthMismatch(f"{x.size} rates vs {g.size} QoS targets")
    return float(np.mean(np.abs(g - x) / g))


def log_pf_objective(mean_rates) -> float:
    """Sum of natural logs of the user mean rates."""
    x = np.asarray(mean_rates, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveRate("log objective needs strictly positive rates")
    return float(np.sum(np.log(x)))


def jain_index(mean_rates) -> float:
    x = np.asarray(mean_rates, dtype=float)
    if np.any(x < 0):
        raise ValueError("Jain index needs nonnegative rates")
    sq = float(np.sum(x * x))
    if sq == 0.0:
        raise AllZero("Jain index undefined for an all-zero vector")
    return float(np.sum(x)) ** 2 / (x.size * sq)


def empirical_cdf(values) -> list[tuple[float, float]]:
    """``(value, fraction <= value)`` at each distinct value, ascending; ends at 1."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise EmptyInput("empirical CDF of an empty sample")
    distinct, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts)
    return [(float(v), float(c) / x.size) for v, c in zip(distinct, cum)]


def convergence_check(window_means, qos, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Per user: is the final window's relative gap to γ within ``epsilon``?"""
    series = np.atleast_2d(np.asarray(window_means, dtype=float))
    if series.shape[0] == 0:
        raise EmptyInput("need at least one window")
    final = series[-1]
    g = _gamma(qos)
    if final.shape != g.shape:
        raise LengthMismatch(f"{final.size} rates vs {g.size} QoS targets")
    return np.abs(g - final) / g <= epsilon


def window_means(per_frame_rates, window: int) -> np.ndarray:
    """K×(T/M) matrix of per-window means of a K×T series."""
    r = np.atleast_2d(np.asarray(per_frame_rates, dtype=float))
    k, t = r.shape
    if window < 1 or t % window:
        raise BadPartition(f"{t} frames cannot be split into windows of {window}")
    return r.reshape(k, t // window, window).mean(axis=2)


def windowed_variance_scaling(per_frame_rates, window_sizes) -> dict[int, np.ndarray]:
    """For each window size M, the per-user sample std of the window means.

    With a single window the std is reported as 0.
    """
    out = {}
    for m in window_sizes:
        means = window_means(per_frame_rates, m)
        if means.shape[1] < 2:
            out[m] = np.zeros(means.shape[0])
        else:
            out[m] = means.std(axis=1, ddof=1)
    return out


def pearson(x, y) -> float:
    """Pearson correlation; nan when either input is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc, yc = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc)))
    return float(np.dot(xc, yc)) / denom if denom > 0 else float("nan")
