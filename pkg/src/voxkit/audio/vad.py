"""Energy-based voice activity detection for edge-silence trimming."""

from dataclasses import dataclass

import numpy as np

DEFAULT_FRAME_S = 0.025
DEFAULT_THRESHOLD_DB = -40.0


@dataclass(frozen=True)
class VoicedSpan:
    start_s: float
    end_s: float

    def __post_init__(self):
        if not 0.0 <= self.start_s <= self.end_s:
            raise ValueError("voiced span must satisfy 0 <= start <= end")

    @property
    def duration_s(self):
        return self.end_s - self.start_s

    @property
    def is_empty(self):
        return self.end_s <= self.start_s


def detect_voiced_span(clip, frame_s=DEFAULT_FRAME_S, energy_threshold_db=DEFAULT_THRESHOLD_DB):
    """Tightest [first, last] span of frames whose RMS clears the threshold.

    The threshold is in dB relative to the clip's peak amplitude. A clip
    with no frame above threshold yields the empty span [0, 0].
    """
    if frame_s <= 0:
        raise ValueError("frame_s must be positive")
    samples = clip.samples
    peak = float(np.max(np.abs(samples))) if len(samples) else 0.0
    if peak == 0.0:
        return VoicedSpan(0.0, 0.0)

    frame_len = max(1, int(round(frame_s * clip.sample_rate)))
    n_frames = int(np.ceil(len(samples) / frame_len))
    padded = np.zeros(n_frames * frame_len)
    padded[: len(samples)] = samples
    frames = padded.reshape(n_frames, frame_len)
    rms = np.sqrt(np.mean(frames**2, axis=1))

    floor = peak * 10.0 ** (energy_threshold_db / 20.0)
    active = np.flatnonzero(rms > floor)
    if len(active) == 0:
        return VoicedSpan(0.0, 0.0)

    start = active[0] * frame_len / clip.sample_rate
    end = min((active[-1] + 1) * frame_len / clip.sample_rate, clip.duration_s)
    return VoicedSpan(float(start), float(end))
