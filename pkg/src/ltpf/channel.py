"""Block-fading Rayleigh channel with first-order Gauss-Markov time correlation."""
from __future__ import annotations

import csv
import math

import numpy as np
from scipy.special import j0

from .errors import NonPositiveDoppler


def coherence_time(doppler_hz: float) -> float:
    """Coherence time in seconds by the 0.423 / f_D rule of thumb."""
    if not doppler_hz > 0:
        raise NonPositiveDoppler(f"doppler must be positive, got {doppler_hz!r}")
    return 0.423 / doppler_hz


def temporal_correlation(doppler_hz: float, frame_duration_s: float) -> float:
    """Clarke lag-one correlation J0(2π f_D T_f), used as the AR(1) coefficient."""
    return float(j0(2.0 * math.pi * doppler_hz * frame_duration_s))


class ChannelProcess:
    """K×N complex Gaussian coefficients advanced once per frame.

    ``c <- a c + sqrt(1 - a^2) w`` keeps every entry unit-variance circular
    Gaussian, so the amplitudes stay Rayleigh. Per-user ``mean_square_gain``
    rescales amplitudes so that E[h^2] equals the calibration value.
    """

    def __init__(self, num_users, num_subcarriers, ar_coeff, mean_square_gain=None,
                 freq_correlation=0.0, seed=0):
        if not abs(ar_coeff) <= 1.0:
            raise ValueError(f"|ar_coeff| must be <= 1, got {ar_coeff!r}")
        if mean_square_gain is None:
            mean_square_gain = np.ones(num_users)
        msg = np.asarray(mean_square_gain, dtype=float)
        if msg.shape != (num_users,) or np.any(msg <= 0):
            raise ValueError("mean_square_gain must hold one positive value per user")
        self.num_users = num_users
        self.num_subcarriers = num_subcarriers
        self.ar_coeff = float(ar_coeff)
        self.mean_square_gain = msg
        self.freq_correlation = float(freq_correlation)
        self.rng = np.random.default_rng(seed)
        self._amp_scale = np.sqrt(msg)[:, None]
        self._innov_scale = math.sqrt(max(0.0, 1.0 - self.ar_coeff ** 2))
        self.state = self._draw()

    def _draw(self) -> np.ndarray:
        shape = (self.num_users, self.num_subcarriers)
        w = (self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape)) / math.sqrt(2.0)
        rho = self.freq_correlation
        if rho != 0.0:
            # AR(1) across frequency gives corr rho^|i-j| between subcarriers i, j
            s = math.sqrt(1.0 - rho * rho)
            for n in range(1, self.num_subcarriers):
                w[:, n] = rho * w[:, n - 1] + s * w[:, n]
        return w

    def gains(self) -> np.ndarray:
        return np.abs(self.state) * self._amp_scale

    def step(self) -> np.ndarray:
        """Advance one frame and return the K×N amplitude matrix."""
        a = self.ar_coeff
        if a == 1.0:
            return self.gains()
        self.state = a * self.state + self._innov_scale * self._draw()
        return self.gains()


def channel_new(cfg, seed=None, ar_coeff=None) -> ChannelProcess:
    """Channel for a validated config; ``seed`` defaults to ``cfg.rng_seed``."""
    return ChannelProcess(
        cfg.num_users, cfg.num_subcarriers,
        cfg.ar_coeff if ar_coeff is None else ar_coeff,
        mean_square_gain=cfg.mean_square_gain,
        freq_correlation=cfg.config.freq_correlation,
        seed=cfg.rng_seed if seed is None else seed)


def channel_step(proc: ChannelProcess) -> np.ndarray:
    return proc.step()


def write_gain_trace(path, gain_frames) -> None:
    """Dump an iterable of K×N gain matrices as CSV rows (frame, user, subcarrier, gain)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "user", "subcarrier", "gain"])
        for t, g in enumerate(gain_frames):
            for k in range(g.shape[0]):
                for n in range(g.shape[1]):
                    w.writerow([t, k, n, f"{g[k, n]:.9g}"])
