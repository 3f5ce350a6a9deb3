#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Covers the three hot loops: YIN pitch estimation, windowed-sinc resampling,
and batched VQ nearest-neighbor search. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

import voxkit._accel as accel
from voxkit.audio import AudioClip, estimate_f0, resample
from voxkit.quantizers import VqCodebook, vq_quantize_batch


def make_speechlike_clip(duration_s=10.0, sample_rate=16000, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(int(duration_s * sample_rate)) / sample_rate
    f0 = 140 + 40 * np.sin(2 * np.pi * 0.7 * t)  # slow vibrato around 140 Hz
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    samples = 0.6 * np.sin(phase) + 0.2 * np.sin(2 * phase) + 0.02 * rng.normal(size=len(t))
    return AudioClip(np.clip(samples, -1, 1), sample_rate)


def bench(fn, repeat):
    fn()  # warmup (also triggers JIT compilation on the numba path)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    clip_16k = make_speechlike_clip(10.0, 16000)
    clip_48k = make_speechlike_clip(10.0, 48000)
    rng = np.random.default_rng(1)
    codebook = VqCodebook(entries=rng.normal(size=(8192, 64)))
    queries = rng.normal(size=(2000, 64))

    cases = {
        "yin_f0 (10 s @ 16 kHz)": lambda: estimate_f0(clip_16k),
        "resample (10 s, 48k->16k)": lambda: resample(clip_48k, 16000),
        "vq_batch (2000 x 64, K=8192)": lambda: vq_quantize_batch(queries, codebook),
    }

    backends = ["numpy"]
    try:
        accel.set_backend("numba")
        backends.append("numba")
    except RuntimeError:
        print("numba not importable; timing the numpy path only")

    results = {}
    for name in backends:
        accel.set_backend(name)
        for case, fn in cases.items():
            results[(case, name)] = bench(fn, args.repeat)

    print(f"{'kernel':<30} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for case in cases:
        np_t = results[(case, "numpy")]
        nb_t = results.get((case, "numba"))
        if nb_t is None:
            print(f"{case:<30} {np_t * 1e3:>8.1f}ms {'-':>10} {'-':>9}")
        else:
            print(f"{case:<30} {np_t * 1e3:>8.1f}ms {nb_t * 1e3:>8.1f}ms "
                  f"{np_t / nb_t:>8.1f}x")


if __name__ == "__main__":
    main()
