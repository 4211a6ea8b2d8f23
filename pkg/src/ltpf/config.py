"""Simulation configuration, QoS profile, allocation checks and config-file I/O."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .allocators import GATING_MODES
from .channel import temporal_correlation
from .errors import (BadDimension, ConfigError, NonPositivePhysical,
                     QoSLengthMismatch)
from .phy import RateModel, snr_gap

FALLBACK_POLICIES = ("max-rate", "greedy-pf")
BUNDLED_CONFIGS = ("table1.cfg",)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class SimConfig:
    bandwidth_hz: float
    total_power_w: float
    num_users: int
    num_subcarriers: int
    target_ber: float
    frame_duration_s: float
    window_frames: int
    noise_density_w_per_hz: float
    doppler_hz: float
    pf_window: int = 100
    psi_init: float = 1.0
    rng_seed: int = 0
    num_windows: int = 1
    # algorithm / channel knobs
    fallback_policy: str = "max-rate"
    ltpf_gating: str = "in-frame"
    mean_square_gain: tuple | None = None   # per user, default all ones
    freq_correlation: float = 0.0           # adjacent-subcarrier correlation
    ar_coeff: float | None = None           # overrides the Doppler-derived value
    # recorded, not used by the rate model
    modulation: str = "16QAM"
    sampling_freq_hz: float | None = None

    @classmethod
    def table1(cls, **overrides) -> "SimConfig":
        """Default system parameters (WiMAX-like 1.25 MHz, 72 subcarriers, 20 users).

        Noise density is not given there; 8e-10 W/Hz puts the mean per-subcarrier
        SNR at 20 dB with the equal-power split.
        """
        base = dict(bandwidth_hz=1.25e6, total_power_w=dbm_to_watts(20.0),
                    num_users=20, num_subcarriers=72, target_ber=1e-3,
                    frame_duration_s=5e-3, window_frames=10,
                    noise_density_w_per_hz=8e-10, doppler_hz=100.0,
                    num_windows=20, sampling_freq_hz=1.5e6)
        base.update(overrides)
        return cls(**base)

    @property
    def num_frames(self) -> int:
        return self.window_frames * self.num_windows

    @property
    def allocation_duration_s(self) -> float:
        return self.window_frames * self.frame_duration_s


@dataclass(frozen=True)
class QoSProfile:
    min_rates_bps: tuple

    def __post_init__(self):
        object.__setattr__(self, "min_rates_bps",
                           tuple(float(x) for x in self.min_rates_bps))

    def __len__(self):
        return len(self.min_rates_bps)

    def as_array(self) -> np.ndarray:
        return np.array(self.min_rates_bps, dtype=float)


@dataclass(frozen=True)
class ValidatedConfig:
    """A checked :class:`SimConfig` together with its QoS profile and derived values."""

    config: SimConfig
    qos: QoSProfile
    subcarrier_bw_hz: float
    per_subcarrier_power_w: float
    snr_gap: float
    ar_coeff: float
    mean_square_gain: tuple = field(default=())

    @property
    def rate_model(self) -> RateModel:
        return RateModel(self.subcarrier_bw_hz, self.per_subcarrier_power_w,
                         self.config.noise_density_w_per_hz, self.snr_gap)

    def __getattr__(self, name):
        # forward plain config fields (num_users, window_frames, ...)
        if name.startswith("_") or name == "config":
            raise AttributeError(name)
        return getattr(self.config, name)


def _check_positive(cfg: SimConfig, names):
    for name in names:
        value = getattr(cfg, name)
        if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
            raise NonPositivePhysical(f"{name} must be positive and finite, got {value!r}")


def validate_config(cfg, qos: QoSProfile | None = None) -> ValidatedConfig:
    """Check every invariant and precompute Ω_n, P_kn, the SNR gap and the AR(1) coefficient.

    Passing an already validated config (with or without ``qos``) returns an
    equal object.
    """
    if isinstance(cfg, ValidatedConfig):
        qos = cfg.qos if qos is None else qos
        cfg = cfg.config
    if qos is None:
        raise ConfigError("a QoS profile is required")

    for name in ("num_users", "num_subcarriers", "window_frames", "pf_window", "num_windows"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise BadDimension(f"{name} must be an integer >= 1, got {value!r}")
    _check_positive(cfg, ("bandwidth_hz", "total_power_w", "noise_density_w_per_hz",
                          "frame_duration_s", "psi_init"))
    if not (cfg.doppler_hz >= 0 and math.isfinite(cfg.doppler_hz)):
        raise NonPositivePhysical(f"doppler_hz must be >= 0, got {cfg.doppler_hz!r}")
    gap = snr_gap(cfg.target_ber)

    if len(qos) != cfg.num_users:
        raise QoSLengthMismatch(
            f"QoS profile has {len(qos)} entries for {cfg.num_users} users")
    if not all(g > 0 and math.isfinite(g) for g in qos.min_rates_bps):
        raise NonPositivePhysical("every QoS rate must be positive and finite")

    if cfg.fallback_policy not in FALLBACK_POLICIES:
        raise ConfigError(f"fallback_policy must be one of {FALLBACK_POLICIES}")
    if cfg.ltpf_gating not in GATING_MODES:
        raise ConfigError(f"ltpf_gating must be one of {GATING_MODES}")
    if not (-1.0 < cfg.freq_correlation < 1.0):
        raise ConfigError("freq_correlation must lie in (-1, 1)")

    if cfg.mean_square_gain is None:
        msg = (1.0,) * cfg.num_users
    else:
        msg = tuple(float(x) for x in cfg.mean_square_gain)
        if len(msg) != cfg.num_users:
            raise BadDimension("mean_square_gain needs one entry per user")
        if not all(x > 0 and math.isfinite(x) for x in msg):
            raise NonPositivePhysical("mean_square_gain entries must be positive")

    if cfg.ar_coeff is None:
        a = temporal_correlation(cfg.doppler_hz, cfg.frame_duration_s)
    else:
        a = float(cfg.ar_coeff)
        if not abs(a) <= 1.0:
            raise ConfigError(f"ar_coeff must satisfy |a| <= 1, got {a!r}")

    return ValidatedConfig(
        config=cfg, qos=qos,
        subcarrier_bw_hz=cfg.bandwidth_hz / cfg.num_subcarriers,
        per_subcarrier_power_w=cfg.total_power_w / cfg.num_subcarriers,
        snr_gap=gap, ar_coeff=a, mean_square_gain=msg)


def check_allocation(owner, num_users: int, num_subcarriers: int) -> np.ndarray:
    """Return ``owner`` as an int array after checking it is a valid one-owner-per-subcarrier map."""
    owner = np.asarray(owner)
    if owner.shape != (num_subcarriers,):
        raise BadDimension(f"allocation must have shape ({num_subcarriers},), got {owner.shape}")
    if not np.issubdtype(owner.dtype, np.integer):
        raise BadDimension("allocation entries must be integers")
    if owner.size and (owner.min() < 0 or owner.max() >= num_users):
        raise BadDimension("allocation refers to a user outside [0, K)")
    return owner


# --- config file --------------------------------------------------------------

_INT_KEYS = {"num_users", "num_subcarriers", "window_frames", "pf_window",
             "rng_seed", "num_windows"}
_FLOAT_KEYS = {"bandwidth_hz", "target_ber", "frame_duration_s", "noise_density_w_per_hz",
               "doppler_hz", "psi_init", "freq_correlation", "sampling_freq_hz"}
_STR_KEYS = {"fallback_policy", "ltpf_gating", "modulation"}
_REQUIRED = ("bandwidth_hz", "total_power_dbm", "num_users", "num_subcarriers",
             "target_ber", "frame_duration_s", "window_frames",
             "noise_density_w_per_hz", "doppler_hz", "qos_profile")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def parse_config(text: str, source: str = "<string>") -> tuple[SimConfig, QoSProfile]:
    """Parse flat ``key = value`` text. ``#`` starts a comment; unknown keys are rejected."""
    known = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"total_power_dbm", "qos_profile",
                                                   "mean_square_gain", "ar_coeff"}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS or key == "total_power_dbm":
                values[key] = float(value)
            elif key in ("qos_profile", "mean_square_gain"):
                values[key] = _floats(value)
            elif key == "ar_coeff":
                values[key] = None if value.lower() in ("", "auto") else float(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from None

    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing keys {', '.join(missing)}")
    qos = QoSProfile(values.pop("qos_profile"))
    values["total_power_w"] = dbm_to_watts(values.pop("total_power_dbm"))
    return SimConfig(**values), qos


def resolve_config_path(path) -> Path:
    """Return ``path`` if it exists, else the bundled file of that name (e.g. ``table1.cfg``)."""
    p = Path(path)
    if p.exists() or p.name not in BUNDLED_CONFIGS or str(p.parent) not in ("", "."):
        return p
    return Path(str(resources.files("ltpf") / "data" / p.name))


def load_config(path) -> tuple[SimConfig, QoSProfile]:
    p = resolve_config_path(path)
    return parse_config(p.read_text(), source=str(p))


def format_config(cfg: SimConfig, qos: QoSProfile) -> str:
    """Serialise back to the ``key = value`` format understood by :func:`parse_config`."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "total_power_w":
            lines.append(f"total_power_dbm = {watts_to_dbm(value)!r}")
        elif value is None:
            continue
        elif isinstance(value, tuple):
            lines.append(f"{f.name} = {', '.join(repr(float(v)) for v in value)}")
        else:
            lines.append(f"{f.name} = {value!r}" if not isinstance(value, str)
                         else f"{f.name} = {value}")
    lines.append(f"qos_profile = {', '.join(repr(v) for v in qos.min_rates_bps)}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
