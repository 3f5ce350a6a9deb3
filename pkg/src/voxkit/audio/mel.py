"""Mel-scale frequency conversion (HTK convention)."""

import numpy as np


def hz_to_mel(f):
    """2595 * log10(1 + f/700); accepts scalars or arrays, rejects negatives."""
    arr = np.asarray(f, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("frequency must be nonnegative")
    mel = 2595.0 * np.log10(1.0 + arr / 700.0)
    return float(mel) if np.isscalar(f) or arr.ndim == 0 else mel


def mel_to_hz(m):
    arr = np.asarray(m, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("mel value must be nonnegative")
    hz = 700.0 * (10.0 ** (arr / 2595.0) - 1.0)
    return float(hz) if np.isscalar(m) or arr.ndim == 0 else hz
