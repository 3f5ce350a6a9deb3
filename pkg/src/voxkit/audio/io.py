"""PCM wave decoding into normalized mono clips."""

import os
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile


class AudioDecodeError(Exception):
    """Raised when a file cannot be decoded into a usable clip."""


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono waveform with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be a positive integer")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


# Divisors mapping the integer PCM container to [-1, 1]. scipy widens
# 24-bit samples into the top bytes of an int32, so one divisor covers both.
_INT_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


def decode_audio(path):
    """Decode a PCM RIFF wave file into a normalized mono AudioClip.

    Multichannel input is averaged down to mono. Integer samples are scaled
    by the container full-scale value; float samples are clipped to [-1, 1].
    """
    if not os.path.exists(path):
        raise AudioDecodeError(f"unreadable file: {path}")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise AudioDecodeError(f"unsupported encoding in {path}: {exc}") from exc
    if data.size == 0:
        raise AudioDecodeError(f"zero-length audio: {path}")

    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in _INT_SCALE:
        samples = data.astype(np.float64) / _INT_SCALE[data.dtype]
    elif np.issubdtype(data.dtype, np.floating):
        samples = np.clip(data.astype(np.float64), -1.0, 1.0)
    else:
        raise AudioDecodeError(f"unsupported sample format {data.dtype} in {path}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples=samples, sample_rate=int(rate))


def write_wav(path, clip, dtype=np.int16):
    """Write a clip back out as PCM wave (test fixtures and CLI round trips)."""
    if dtype == np.int16:
        data = np.clip(np.round(clip.samples * 32767.0), -32768, 32767).astype(np.int16)
    else:
        data = clip.samples.astype(np.float32)
    wavfile.write(path, clip.sample_rate, data)
