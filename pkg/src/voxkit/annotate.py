"""Attribute annotation: pitch/speed fine values, five-level buckets with the
published boundary tables, and percentile-based boundary derivation."""

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from .audio.mel import hz_to_mel


class Gender(enum.Enum):
    MALE = "male"
    FEMALE = "female"


class Language(enum.Enum):
    ENGLISH = "english"
    CHINESE = "chinese"


PITCH_LEVEL_NAMES = ("very_low", "low", "moderate", "high", "very_high")
SPEED_LEVEL_NAMES = ("very_slow", "slow", "moderate", "fast", "very_fast")

# Percentiles used to derive the five-bucket cut points from corpus statistics.
PITCH_PERCENTILES = (0.05, 0.20, 0.70, 0.90)
SPEED_PERCENTILES = (0.05, 0.20, 0.80, 0.95)


class AnnotationError(Exception):
    pass


@dataclass(frozen=True)
class LevelBoundaries:
    """Four strictly increasing cut points defining five ordered buckets.

    Buckets are lower-inclusive: (-inf,c1) [c1,c2) [c2,c3) [c3,c4) [c4,inf).
    """

    cuts: tuple
    unit: str  # "mel" or "sps"

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cuts)
        if len(cuts) != 4:
            raise ValueError("exactly four cut points required")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError("cut points must be strictly increasing")
        object.__setattr__(self, "cuts", cuts)


_PITCH_BOUNDARIES = {
    Gender.MALE: LevelBoundaries((145.0, 164.0, 211.0, 250.0), "mel"),
    Gender.FEMALE: LevelBoundaries((225.0, 258.0, 314.0, 353.0), "mel"),
}

_SPEED_BOUNDARIES = {
    Language.ENGLISH: LevelBoundaries((2.6, 3.4, 4.8, 5.5), "sps"),
    Language.CHINESE: LevelBoundaries((2.7, 3.6, 5.2, 6.1), "sps"),
}


def builtin_pitch_boundaries(gender):
    return _PITCH_BOUNDARIES[Gender(gender)]


def builtin_speed_boundaries(language):
    return _SPEED_BOUNDARIES[Language(language)]


def bucket(value, boundaries):
    """Ordinal level 0..4 for a measurement, lower-inclusive at each cut."""
    if math.isnan(value):
        raise ValueError("cannot bucket NaN")
    return int(np.searchsorted(boundaries.cuts, value, side="right"))


def round_half_away(x):
    """Nearest integer, ties away from zero: round_half_away(2.5) == 3."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


@dataclass(frozen=True)
class PitchAnnotation:
    fine_value_hz: int
    level: int

    @property
    def level_name(self):
        return PITCH_LEVEL_NAMES[self.level]


@dataclass(frozen=True)
class SpeedAnnotation:
    fine_value_sps: int
    level: int

    @property
    def level_name(self):
        return SPEED_LEVEL_NAMES[self.level]


def annotate_pitch(estimate, gender, boundaries=None):
    """Fine token = nearest-integer Hz; level from gender-specific Mel cuts."""
    if estimate.voiced_frame_count == 0 or estimate.mean_f0_hz is None:
        raise AnnotationError("pitch unannotatable: no voiced frames")
    bounds = boundaries or builtin_pitch_boundaries(gender)
    level = bucket(hz_to_mel(estimate.mean_f0_hz), bounds)
    return PitchAnnotation(fine_value_hz=round_half_away(estimate.mean_f0_hz), level=level)


# CJK Unified Ideographs: base block, extension A, compatibility block,
# and the supplementary-plane extensions. One syllable per character.
_HAN_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2EBEF),
)

_VOWELS = set("aeiouy")
_WORD_RE = re.compile(r"[a-z']+")


def _is_han(ch):
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _HAN_RANGES)


def _english_word_syllables(word):
    letters = word.replace("'", "")
    if not letters:
        return 0
    groups = 0
    prev_vowel = False
    for ch in letters:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    # Terminal silent e: dropped unless the word ends in consonant + "le"
    # ("table" keeps its final syllable, "here" does not).
    if (
        groups > 1
        and letters.endswith("e")
        and not (
            len(letters) >= 3
            and letters.endswith("le")
            and letters[-3] not in _VOWELS
        )
    ):
        groups -= 1
    return max(1, groups)


def count_syllables(text, language):
    """Chinese: one syllable per Han character. English: vowel-group count
    per word with a terminal-silent-e rule and a one-syllable minimum."""
    language = Language(language)
    if not text or not text.strip():
        raise AnnotationError("empty text")
    if language is Language.CHINESE:
        return sum(1 for ch in text if _is_han(ch))
    total = sum(_english_word_syllables(w) for w in _WORD_RE.findall(text.lower()))
    return total


def annotate_speed(clip, text, language, vad_span, boundaries=None):
    """SPS over the voiced span; fine token rounded, level from the raw SPS."""
    if vad_span.is_empty:
        raise AnnotationError("empty voiced span")
    syllables = count_syllables(text, language)
    if syllables <= 0:
        raise AnnotationError("zero syllables")
    raw_sps = syllables / vad_span.duration_s
    bounds = boundaries or builtin_speed_boundaries(language)
    return SpeedAnnotation(fine_value_sps=round_half_away(raw_sps), level=bucket(raw_sps, bounds))


def derive_boundaries(values, percentiles, unit="mel"):
    """Nearest-rank percentiles (ceil(p*n)-th order statistic) as cut points."""
    values = np.asarray(list(values), dtype=np.float64)
    n = len(values)
    if n < 20:
        raise AnnotationError("need at least 20 values to derive boundaries")
    ps = tuple(float(p) for p in percentiles)
    if len(ps) != 4 or any(not 0.0 < p < 1.0 for p in ps) or any(
        b <= a for a, b in zip(ps, ps[1:])
    ):
        raise ValueError("percentiles must be four strictly increasing fractions in (0,1)")
    ordered = np.sort(values)
    cuts = tuple(float(ordered[max(1, math.ceil(p * n)) - 1]) for p in ps)
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise AnnotationError("degenerate distribution: tied order statistics")
    return LevelBoundaries(cuts, unit)
