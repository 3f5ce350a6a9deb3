import json
import os

import pytest

from voxkit.annotate import Gender, Language, PitchAnnotation, SpeedAnnotation
from voxkit.cleaning import CleaningVerdict
from voxkit.pipeline import ManifestError, ManifestRecord, read_manifest, write_manifest


def make_record(i=0, **overrides):
    fields = dict(
        utt_id=f"utt{i:04d}",
        audio_path=f"/data/utt{i:04d}.wav",
        text="hello there",
        language=Language.ENGLISH,
    )
    fields.update(overrides)
    return ManifestRecord(**fields)


def test_roundtrip_minimal(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest([make_record(0), make_record(1)], path)
    records, errors = read_manifest(path)
    assert not errors
    assert [r.utt_id for r in records] == ["utt0000", "utt0001"]
    assert records[0].language is Language.ENGLISH
    assert records[0].pitch is None and records[0].cleaning is None


def test_roundtrip_full_record(tmp_path):
    record = make_record(
        0,
        gender=Gender.FEMALE,
        pitch=PitchAnnotation(fine_value_hz=212, level=3),
        speed=SpeedAnnotation(fine_value_sps=4, level=2),
        duration_s=3.25,
        cleaning=CleaningVerdict(keep=True, rule="none", wer=0.0),
        external_tags={"emotion": "neutral", "confidence": 0.93},
        flags=["pitch_deferred"],
    )
    path = tmp_path / "m.jsonl"
    write_manifest([record], path)
    (loaded,), _ = read_manifest(path)
    assert loaded == record


def test_unknown_fields_preserved(tmp_path):
    doc = {
        "utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "chinese",
        "speaker": "spk1", "corpus": {"name": "x", "split": "train"},
    }
    path = tmp_path / "m.jsonl"
    path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
    (record,), _ = read_manifest(path)
    assert record.extras == {"speaker": "spk1", "corpus": {"name": "x", "split": "train"}}
    out = tmp_path / "out.jsonl"
    write_manifest([record], out)
    assert json.loads(out.read_text())["speaker"] == "spk1"
    assert json.loads(out.read_text())["corpus"] == {"name": "x", "split": "train"}


def test_missing_field_reports_line_number(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "english"}\n'
                    '{"utt_id": "b"}\n', encoding="utf-8")
    with pytest.raises(ManifestError, match="line 2"):
        read_manifest(path)


def test_lenient_skips_bad_lines(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "english"}\n'
                    "not json\n"
                    '{"utt_id": "c", "audio_path": "c.wav", "text": "yo", "language": "english"}\n',
                    encoding="utf-8")
    records, errors = read_manifest(path, lenient=True)
    assert [r.utt_id for r in records] == ["a", "c"]
    assert len(errors) == 1 and errors[0].line_number == 2


def test_duplicate_utt_id_rejected(tmp_path):
    line = '{"utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "english"}\n'
    path = tmp_path / "m.jsonl"
    path.write_text(line + line, encoding="utf-8")
    with pytest.raises(ManifestError, match="duplicate"):
        read_manifest(path)


def test_bad_language_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "klingon"}\n',
                    encoding="utf-8")
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_blank_lines_ignored(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('\n{"utt_id": "a", "audio_path": "a.wav", "text": "hi", "language": "english"}\n\n',
                    encoding="utf-8")
    records, _ = read_manifest(path)
    assert len(records) == 1


def test_write_is_atomic_no_temp_left_behind(tmp_path):
    path = tmp_path / "m.jsonl"
    write_manifest([make_record(0)], path)
    write_manifest([make_record(0), make_record(1)], path)
    leftovers = [n for n in os.listdir(tmp_path) if n.startswith(".manifest-")]
    assert leftovers == []
    records, _ = read_manifest(path)
    assert len(records) == 2


def test_write_non_ascii_verbatim(tmp_path):
    record = make_record(0, text="你好世界", language=Language.CHINESE)
    path = tmp_path / "m.jsonl"
    write_manifest([record], path)
    assert "你好世界" in path.read_text(encoding="utf-8")


def test_flag_dedupes():
    record = make_record(0)
    record.flag("unvoiced")
    record.flag("unvoiced")
    assert record.flags == ["unvoiced"]
