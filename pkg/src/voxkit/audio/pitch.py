"""Fundamental-frequency estimation.

YIN-style estimator: per-frame difference function, cumulative-mean
normalization, absolute-threshold lag pick with parabolic refinement.
The per-frame lag search is the hot loop; it runs through numba or a
numpy sliding-window formulation, selected by voxkit._accel.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .. import _accel

DEFAULT_F0_MIN = 65.0
DEFAULT_F0_MAX = 600.0
DEFAULT_HOP_S = 0.010
DEFAULT_VOICING_THRESHOLD = 0.3


class PitchError(Exception):
    pass


@dataclass(frozen=True)
class PitchEstimate:
    """Mean F0 over voiced frames; mean_f0_hz is None when nothing is voiced."""

    mean_f0_hz: float | None
    voiced_frame_count: int
    frame_hop_s: float


def _parabolic_shift(y1, y2, y3):
    denom = y1 - 2.0 * y2 + y3
    if denom == 0.0:
        return 0.0
    shift = 0.5 * (y1 - y3) / denom
    return min(1.0, max(-1.0, shift))


def _frame_f0_numpy(samples, starts, tau_min, tau_max, threshold, sample_rate):
    span = 2 * tau_max
    f0 = np.zeros(len(starts))
    for i, s in enumerate(starts):
        segment = samples[s : s + span]
        windows = sliding_window_view(segment, tau_max)  # (tau_max + 1, tau_max)
        d = ((windows[0] - windows) ** 2).sum(axis=1)
        cm = np.ones(tau_max + 1)
        running = np.cumsum(d[1:])
        nonzero = running > 0.0
        cm[1:][nonzero] = d[1:][nonzero] * np.arange(1, tau_max + 1)[nonzero] / running[nonzero]

        tau = tau_min
        found = -1
        while tau <= tau_max:
            if cm[tau] < threshold:
                while tau + 1 <= tau_max and cm[tau + 1] < cm[tau]:
                    tau += 1
                found = tau
                break
            tau += 1
        if found < 0:
            continue
        if 0 < found < tau_max:
            shift = _parabolic_shift(cm[found - 1], cm[found], cm[found + 1])
        else:
            shift = 0.0
        f0[i] = sample_rate / (found + shift)
    return f0


_frame_f0_numba = None


def _get_frame_f0_numba():
    global _frame_f0_numba
    if _frame_f0_numba is None:
        from numba import njit

        @njit(cache=True)
        def kernel(samples, starts, tau_min, tau_max, threshold, sample_rate):
            f0 = np.zeros(len(starts))
            d = np.zeros(tau_max + 1)
            cm = np.zeros(tau_max + 1)
            for i in range(len(starts)):
                s = starts[i]
                for tau in range(tau_max + 1):
                    acc = 0.0
                    for j in range(tau_max):
                        diff = samples[s + j] - samples[s + j + tau]
                        acc += diff * diff
                    d[tau] = acc
                cm[0] = 1.0
                running = 0.0
                for tau in range(1, tau_max + 1):
                    running += d[tau]
                    cm[tau] = d[tau] * tau / running if running > 0.0 else 1.0

                found = -1
                tau = tau_min
                while tau <= tau_max:
                    if cm[tau] < threshold:
                        while tau + 1 <= tau_max and cm[tau + 1] < cm[tau]:
                            tau += 1
                        found = tau
                        break
                    tau += 1
                if found < 0:
                    continue
                shift = 0.0
                if 0 < found < tau_max:
                    y1, y2, y3 = cm[found - 1], cm[found], cm[found + 1]
                    denom = y1 - 2.0 * y2 + y3
                    if denom != 0.0:
                        shift = 0.5 * (y1 - y3) / denom
                        shift = min(1.0, max(-1.0, shift))
                f0[i] = sample_rate / (found + shift)
            return f0

        _frame_f0_numba = kernel
    return _frame_f0_numba


def estimate_f0(
    clip,
    f0_min=DEFAULT_F0_MIN,
    f0_max=DEFAULT_F0_MAX,
    frame_hop_s=DEFAULT_HOP_S,
    voicing_threshold=DEFAULT_VOICING_THRESHOLD,
):
    """Estimate mean F0 over voiced frames of a clip.

    Frames whose cumulative-mean-normalized difference never drops below
    the voicing threshold in the candidate lag range count as unvoiced.
    """
    sr = clip.sample_rate
    if not 0.0 < f0_min < f0_max < sr / 2:
        raise ValueError("need 0 < f0_min < f0_max < sample_rate/2")

    tau_min = max(2, int(sr // f0_max))
    tau_max = int(math.ceil(sr / f0_min))
    span = 2 * tau_max
    if len(clip) < 2 * span:
        raise PitchError("clip shorter than two analysis windows")

    hop = max(1, int(round(frame_hop_s * sr)))
    starts = np.arange(0, len(clip) - span + 1, hop, dtype=np.int64)

    if _accel.use_numba():
        f0 = _get_frame_f0_numba()(
            clip.samples, starts, tau_min, tau_max, voicing_threshold, float(sr)
        )
    else:
        f0 = _frame_f0_numpy(clip.samples, starts, tau_min, tau_max, voicing_threshold, float(sr))

    voiced = f0[f0 > 0.0]
    if len(voiced) == 0:
        return PitchEstimate(mean_f0_hz=None, voiced_frame_count=0, frame_hop_s=frame_hop_s)
    return PitchEstimate(
        mean_f0_hz=float(voiced.mean()),
        voiced_frame_count=int(len(voiced)),
        frame_hop_s=frame_hop_s,
    )
