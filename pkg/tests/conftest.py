import json

import numpy as np
import pytest

from voxkit.audio import AudioClip
from voxkit.audio.io import write_wav


def sine_clip(freq_hz, duration_s=2.0, sample_rate=16000, amplitude=0.5, phase=0.0):
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return AudioClip(amplitude * np.sin(2 * np.pi * freq_hz * t + phase), sample_rate)


def noise_clip(duration_s=2.0, sample_rate=16000, amplitude=0.3, seed=1234):
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    return AudioClip(np.clip(rng.normal(0.0, amplitude, n), -1.0, 1.0), sample_rate)


def build_corpus(root, count=12, sample_rate=16000, seed=0):
    """Write `count` sine-tone wavs plus a manifest JSONL under `root`.

    Alternates gender (with the tone pitched inside each gender's moderate
    band) and attaches a matching ASR hypothesis every other record. Returns
    the manifest path.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(count):
        gender = "male" if i % 2 == 0 else "female"
        freq = 130.0 + rng.uniform(-5, 5) if gender == "male" else 210.0 + rng.uniform(-5, 5)
        duration = 1.0 + (i % 4) * 0.5
        wav = root / f"utt{i:04d}.wav"
        write_wav(wav, sine_clip(freq, duration_s=duration, sample_rate=sample_rate))
        words = ["one", "two", "three", "four", "five", "six"][: 2 + i % 4]
        text = " ".join(words)
        doc = {
            "utt_id": f"utt{i:04d}",
            "audio_path": str(wav),
            "text": text,
            "language": "english",
            "gender": gender,
            "asr_hypothesis": text if i % 2 == 0 else text + " extra",
            "speaker": f"spk{i % 3}",
        }
        lines.append(json.dumps(doc, sort_keys=True))
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture
def make_sine():
    return sine_clip


@pytest.fixture
def make_noise():
    return noise_clip
