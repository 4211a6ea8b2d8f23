"""Multi-user OFDMA downlink simulator with long-term proportional fair allocation."""
from .config import QoSProfile, SimConfig, ValidatedConfig, load_config, validate_config
from .engine import ExperimentResult, calibrate_qos_profile, run_experiment, run_sweep

__all__ = ["QoSProfile", "SimConfig", "ValidatedConfig", "load_config", "validate_config",
           "ExperimentResult", "calibrate_qos_profile", "run_experiment", "run_sweep"]
