"""EEG/EMG movement-stage recognition: features, fusion and ERD/ERS curves."""

import json

from ._core import (
    ConfigError,
    DataError,
    Modality,
    ar_coefficients,
    band_power,
    bandpass,
    choose_source,
    dwt_energies,
    erd_ers_curve,
    fusion_weights,
    mav,
    noisiness,
    savgol,
    simpson,
    spectral_energy,
    variance,
    waveform_length,
    welch_psd,
    willison_amplitude,
)
from ._core import default_config as _default_config
from ._core import generate_trial as _generate_trial
from ._core import normalize_config as _normalize_config

__version__ = "0.1.0"


def default_config():
    """Full pipeline configuration with every default filled in."""
    return json.loads(_default_config())


def normalize_config(config):
    """Validates a config dict and returns it with defaults filled in."""
    return json.loads(_normalize_config(json.dumps(config)))


def generate_trial(trial_id, seed=0, config=None):
    """One synthetic trial as a dict with 'eeg' and 'emg' recordings."""
    return _generate_trial(trial_id, seed, json.dumps(config) if config else "")


__all__ = [
    "ConfigError",
    "DataError",
    "Modality",
    "ar_coefficients",
    "band_power",
    "bandpass",
    "choose_source",
    "default_config",
    "dwt_energies",
    "erd_ers_curve",
    "fusion_weights",
    "generate_trial",
    "mav",
    "noisiness",
    "normalize_config",
    "savgol",
    "simpson",
    "spectral_energy",
    "variance",
    "waveform_length",
    "welch_psd",
    "willison_amplitude",
]
