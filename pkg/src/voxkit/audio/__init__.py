from .io import AudioClip, AudioDecodeError, decode_audio, write_wav
from .mel import hz_to_mel, mel_to_hz
from .pitch import PitchError, PitchEstimate, estimate_f0
from .resample import resample
from .vad import VoicedSpan, detect_voiced_span

__all__ = [
    "AudioClip",
    "AudioDecodeError",
    "decode_audio",
    "write_wav",
    "hz_to_mel",
    "mel_to_hz",
    "PitchError",
    "PitchEstimate",
    "estimate_f0",
    "resample",
    "VoicedSpan",
    "detect_voiced_span",
]
