"""Band-limited sample-rate conversion via windowed-sinc interpolation.

A 64-tap Kaiser-windowed sinc filter is precomputed as a phase table
(513 phases); the per-sample interpolation loop is the hot path and runs
either through numba or a vectorized numpy gather, selected by
voxkit._accel.
"""

import numpy as np

from .. import _accel
from .io import AudioClip

TAPS = 64
_HALF = TAPS // 2  # taps at offsets -31..+32 around the source position
KAISER_BETA = 8.6
_PHASES = 512


def _filter_table(cutoff):
    """Rows q=0.._PHASES: tap weights for fractional offset q/_PHASES.

    cutoff is relative to the input Nyquist (1.0 = no band reduction).
    Rows are normalized to unit sum so DC passes exactly.
    """
    offsets = np.arange(-(_HALF - 1), _HALF + 1, dtype=np.float64)  # -31..32
    frac = np.arange(_PHASES + 1, dtype=np.float64)[:, None] / _PHASES
    t = offsets[None, :] - frac
    h = cutoff * np.sinc(cutoff * t)
    arg = 1.0 - (t / _HALF) ** 2
    window = np.where(arg > 0.0, np.i0(KAISER_BETA * np.sqrt(np.clip(arg, 0.0, None))), 0.0)
    window /= np.i0(KAISER_BETA)
    table = h * window
    table /= table.sum(axis=1, keepdims=True)
    return table


def _interp_numpy(padded, positions, table):
    base = np.floor(positions).astype(np.int64)
    frac = positions - base
    phase = np.round(frac * _PHASES).astype(np.int64)
    # padded has _HALF leading zeros, so source index base-31 maps to base+1
    idx = base[:, None] + np.arange(1, TAPS + 1)[None, :]
    return np.einsum("ij,ij->i", padded[idx], table[phase])


_interp_numba = None


def _get_interp_numba():
    global _interp_numba
    if _interp_numba is None:
        from numba import njit

        @njit(cache=True)
        def kernel(padded, positions, table):
            out = np.empty(len(positions))
            for i in range(len(positions)):
                pos = positions[i]
                base = int(np.floor(pos))
                phase = int(round((pos - base) * _PHASES))
                acc = 0.0
                for k in range(TAPS):
                    acc += padded[base + 1 + k] * table[phase, k]
                out[i] = acc
            return out

        _interp_numba = kernel
    return _interp_numba


def resample(clip, target_rate):
    """Resample to target_rate with a 64-tap Kaiser-windowed sinc filter."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return clip

    ratio = target_rate / clip.sample_rate
    n_out = max(1, int(round(len(clip) * ratio)))
    cutoff = min(1.0, ratio) * 0.945
    table = _filter_table(cutoff)

    padded = np.concatenate(
        [np.zeros(_HALF), clip.samples, np.zeros(_HALF + TAPS)]
    )
    positions = np.arange(n_out, dtype=np.float64) / ratio

    if _accel.use_numba():
        out = _get_interp_numba()(padded, positions, table)
    else:
        out = _interp_numpy(padded, positions, table)
    return AudioClip(samples=np.clip(out, -1.0, 1.0), sample_rate=int(target_rate))
