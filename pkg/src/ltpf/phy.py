"""Rate model: SNR-gap capacity per subcarrier and the time-diversity bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (BadBranchCount, BerOutOfRange, NegativeGain,
                     NonPositivePhysical, NonPositiveSnr)


def snr_gap(target_ber: float) -> float:
    """Gap between Shannon capacity and a practical M-QAM link at ``target_ber``.

    Uses the usual approximation ``-ln(5 * BER) / 1.6``, which is only
    positive for BER below 0.2.
    """
    if not (0.0 < target_ber < 0.2):
        raise BerOutOfRange(f"target BER must lie in (0, 0.2), got {target_ber!r}")
    return -math.log(5.0 * target_ber) / 1.6


@dataclass(frozen=True)
class RateModel:
    subcarrier_bw_hz: float
    per_subcarrier_power_w: float
    noise_density_w_per_hz: float
    snr_gap: float

    def __post_init__(self):
        for name in ("subcarrier_bw_hz", "per_subcarrier_power_w",
                     "noise_density_w_per_hz", "snr_gap"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise NonPositivePhysical(f"{name} must be positive and finite, got {value!r}")

    @property
    def snr_scale(self) -> float:
        # effective SNR per unit squared gain, gap already applied
        return self.per_subcarrier_power_w / (
            self.noise_density_w_per_hz * self.subcarrier_bw_hz * self.snr_gap)

    def rates(self, gains) -> np.ndarray:
        """Vectorised ``subcarrier_rate`` over an array of amplitudes."""
        h = np.asarray(gains, dtype=float)
        if np.any(h < 0) or not np.all(np.isfinite(h)):
            raise NegativeGain("channel gains must be nonnegative and finite")
        return self.subcarrier_bw_hz * np.log2(1.0 + h * h * self.snr_scale)


def subcarrier_rate(gain, model: RateModel):
    """Achievable rate in bit/s on one subcarrier with amplitude gain ``gain``.

    ``Ω · log2(1 + h² P / (N_t Ω Γ))``. The gap divides the SNR inside the
    logarithm. Accepts a scalar (returns float) or an array.
    """
    out = model.rates(gain)
    return float(out) if out.ndim == 0 else out


def user_frame_rate(gains_row, alloc, model: RateModel, user: int) -> float:
    """Sum of subcarrier rates over the subcarriers ``alloc`` gives to ``user``."""
    owner = np.asarray(alloc)
    row = np.asarray(gains_row, dtype=float)
    mask = owner == user
    if not mask.any():
        return 0.0
    # bincount sums in index order, same as frame_rates, so the two agree bit for bit
    per_sc = model.rates(row[mask])
    return float(np.bincount(np.zeros(per_sc.size, dtype=np.intp), weights=per_sc)[0])


def frame_rates(gains, alloc, model: RateModel) -> np.ndarray:
    """Per-user frame rates (length K) for a K×N gain matrix and an allocation."""
    g = np.asarray(gains, dtype=float)
    owner = np.asarray(alloc)
    n_idx = np.arange(g.shape[1])
    per_sc = model.rates(g[owner, n_idx])
    return np.bincount(owner, weights=per_sc, minlength=g.shape[0]).astype(float)


def diversity_error_bound(branches: int, snr: float) -> float:
    """Asymptotic average error probability with ``branches`` diversity branches.

    ``C(2M-1, M) / (4 snr)^M``. This is a high-SNR bound and exceeds 1 when
    the SNR is small.
    """
    if int(branches) != branches or branches < 1:
        raise BadBranchCount(f"branch count must be an integer >= 1, got {branches!r}")
    if not snr > 0:
        raise NonPositiveSnr(f"snr must be positive, got {snr!r}")
    m = int(branches)
    return math.comb(2 * m - 1, m) / (4.0 * snr) ** m
