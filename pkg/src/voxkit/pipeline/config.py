"""Pipeline configuration: DSP parameters, boundary overrides, rule set."""

from dataclasses import dataclass, field

import yaml

from ..annotate import (
    Gender,
    Language,
    LevelBoundaries,
    builtin_pitch_boundaries,
    builtin_speed_boundaries,
)
from ..audio import pitch as pitch_mod
from ..audio import vad as vad_mod


@dataclass
class PipelineConfig:
    target_rate: int = 16000
    vad_frame_s: float = vad_mod.DEFAULT_FRAME_S
    vad_threshold_db: float = vad_mod.DEFAULT_THRESHOLD_DB
    f0_min: float = pitch_mod.DEFAULT_F0_MIN
    f0_max: float = pitch_mod.DEFAULT_F0_MAX
    f0_hop_s: float = pitch_mod.DEFAULT_HOP_S
    voicing_threshold: float = pitch_mod.DEFAULT_VOICING_THRESHOLD
    rule_set: str = "wer_005"
    normalize_before_wer: bool = True
    # Boundary overrides: {"male": [c1..c4], ...} / {"english": [...], ...}
    pitch_boundaries: dict = field(default_factory=dict)
    speed_boundaries: dict = field(default_factory=dict)
    vocabulary_path: str | None = None
    classifier: dict | None = None

    def pitch_bounds(self, gender):
        gender = Gender(gender)
        if gender.value in self.pitch_boundaries:
            return LevelBoundaries(tuple(self.pitch_boundaries[gender.value]), "mel")
        return builtin_pitch_boundaries(gender)

    def speed_bounds(self, language):
        language = Language(language)
        if language.value in self.speed_boundaries:
            return LevelBoundaries(tuple(self.speed_boundaries[language.value]), "sps")
        return builtin_speed_boundaries(language)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f) or {}
        known = {f_.name for f_ in cls.__dataclass_fields__.values()}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)
