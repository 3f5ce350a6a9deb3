"""Line-delimited UTF-8 manifest records with atomic writes.

Unknown fields survive a read/write round trip verbatim; writes go through
a temp file in the target directory followed by os.replace.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field

from ..annotate import (
    Gender,
    Language,
    PITCH_LEVEL_NAMES,
    PitchAnnotation,
    SPEED_LEVEL_NAMES,
    SpeedAnnotation,
)
from ..cleaning import CleaningVerdict


class ManifestError(Exception):
    def __init__(self, message, line_number=None):
        super().__init__(message if line_number is None else f"line {line_number}: {message}")
        self.line_number = line_number


_KNOWN_FIELDS = {
    "utt_id",
    "audio_path",
    "text",
    "language",
    "asr_hypothesis",
    "gender",
    "pitch",
    "speed",
    "duration_s",
    "cleaning",
    "external_tags",
    "flags",
}


@dataclass
class ManifestRecord:
    utt_id: str
    audio_path: str
    text: str
    language: Language
    asr_hypothesis: str | None = None
    gender: Gender | None = None
    pitch: PitchAnnotation | None = None
    speed: SpeedAnnotation | None = None
    duration_s: float | None = None
    cleaning: CleaningVerdict | None = None
    external_tags: dict | None = None
    flags: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def flag(self, tag):
        if tag not in self.flags:
            self.flags.append(tag)

    def to_dict(self):
        doc = dict(self.extras)
        doc["utt_id"] = self.utt_id
        doc["audio_path"] = self.audio_path
        doc["text"] = self.text
        doc["language"] = self.language.value
        if self.asr_hypothesis is not None:
            doc["asr_hypothesis"] = self.asr_hypothesis
        if self.gender is not None:
            doc["gender"] = self.gender.value
        if self.pitch is not None:
            doc["pitch"] = {
                "fine_value_hz": self.pitch.fine_value_hz,
                "level": PITCH_LEVEL_NAMES[self.pitch.level],
            }
        if self.speed is not None:
            doc["speed"] = {
                "fine_value_sps": self.speed.fine_value_sps,
                "level": SPEED_LEVEL_NAMES[self.speed.level],
            }
        if self.duration_s is not None:
            doc["duration_s"] = round(self.duration_s, 6)
        if self.cleaning is not None:
            doc["cleaning"] = {
                "keep": self.cleaning.keep,
                "rule": self.cleaning.rule,
                "wer": round(self.cleaning.wer, 6),
            }
        if self.external_tags is not None:
            doc["external_tags"] = self.external_tags
        if self.flags:
            doc["flags"] = self.flags
        return doc

    @classmethod
    def from_dict(cls, doc, line_number=None):
        try:
            utt_id = doc["utt_id"]
            audio_path = doc["audio_path"]
            text = doc["text"]
            language = Language(doc["language"])
        except KeyError as exc:
            raise ManifestError(f"missing field {exc.args[0]}", line_number) from exc
        except ValueError as exc:
            raise ManifestError(str(exc), line_number) from exc

        pitch = None
        if doc.get("pitch") is not None:
            p = doc["pitch"]
            pitch = PitchAnnotation(
                fine_value_hz=int(p["fine_value_hz"]),
                level=PITCH_LEVEL_NAMES.index(p["level"]),
            )
        speed = None
        if doc.get("speed") is not None:
            s = doc["speed"]
            speed = SpeedAnnotation(
                fine_value_sps=int(s["fine_value_sps"]),
                level=SPEED_LEVEL_NAMES.index(s["level"]),
            )
        cleaning = None
        if doc.get("cleaning") is not None:
            c = doc["cleaning"]
            cleaning = CleaningVerdict(keep=bool(c["keep"]), rule=c["rule"], wer=float(c["wer"]))
        extras = {k: v for k, v in doc.items() if k not in _KNOWN_FIELDS}
        return cls(
            utt_id=utt_id,
            audio_path=audio_path,
            text=text,
            language=language,
            asr_hypothesis=doc.get("asr_hypothesis"),
            gender=Gender(doc["gender"]) if doc.get("gender") else None,
            pitch=pitch,
            speed=speed,
            duration_s=float(doc["duration_s"]) if doc.get("duration_s") is not None else None,
            cleaning=cleaning,
            external_tags=doc.get("external_tags"),
            flags=list(doc.get("flags", [])),
            extras=extras,
        )


def read_manifest(path, lenient=False):
    """Parse a manifest; returns (records, errors). Malformed lines abort
    unless lenient, in which case they are reported and skipped."""
    records = []
    errors = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                if not isinstance(doc, dict):
                    raise ManifestError("record is not an object", line_number)
                record = ManifestRecord.from_dict(doc, line_number)
                if record.utt_id in seen:
                    raise ManifestError(f"duplicate utt_id {record.utt_id!r}", line_number)
                seen.add(record.utt_id)
                records.append(record)
            except json.JSONDecodeError as exc:
                err = ManifestError(f"malformed line: {exc}", line_number)
                if not lenient:
                    raise err
                errors.append(err)
            except ManifestError as err:
                if not lenient:
                    raise
                errors.append(err)
    return records, errors


def write_manifest(records, path):
    """Atomic write: serialize to a sibling temp file, then rename over path."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(prefix=".manifest-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True))
                f.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
