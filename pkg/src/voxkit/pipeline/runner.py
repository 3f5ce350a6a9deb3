"""Batch annotation and cleaning over manifests.

Per-record work is pure, so it runs through a process pool when jobs > 1;
results are re-ordered canonically by utt_id, making output independent of
worker scheduling. A failing record is flagged, never fatal to the batch.
"""

from concurrent.futures import ProcessPoolExecutor

from ..annotate import AnnotationError, annotate_pitch, annotate_speed
from ..audio import AudioDecodeError, decode_audio, detect_voiced_span, estimate_f0, resample
from ..audio.pitch import PitchError
from ..cleaning import CleaningError, judge_transcript
from .config import PipelineConfig


def _annotate_record(args):
    record, config = args
    record.flags = [
        f for f in record.flags
        if f not in ("decode_failed", "unvoiced", "pitch_deferred", "pitch_failed",
                     "zero_syllables", "empty_voiced_span")
    ]
    try:
        clip = decode_audio(record.audio_path)
    except AudioDecodeError:
        record.flag("decode_failed")
        return record
    clip = resample(clip, config.target_rate)
    record.duration_s = clip.duration_s
    span = detect_voiced_span(clip, config.vad_frame_s, config.vad_threshold_db)

    record.pitch = None
    try:
        estimate = estimate_f0(
            clip,
            f0_min=config.f0_min,
            f0_max=config.f0_max,
            frame_hop_s=config.f0_hop_s,
            voicing_threshold=config.voicing_threshold,
        )
        if estimate.voiced_frame_count == 0:
            record.flag("unvoiced")
        elif record.gender is None:
            # Gender arrives from the external classifier; without it the
            # Mel boundaries cannot be chosen.
            record.flag("pitch_deferred")
        else:
            record.pitch = annotate_pitch(
                estimate, record.gender, config.pitch_bounds(record.gender)
            )
    except PitchError:
        record.flag("pitch_failed")

    record.speed = None
    try:
        record.speed = annotate_speed(
            clip, record.text, record.language, span,
            config.speed_bounds(record.language),
        )
    except AnnotationError as exc:
        if "voiced span" in str(exc):
            record.flag("empty_voiced_span")
        else:
            record.flag("zero_syllables")
    return record


def run_annotate(records, config=None, jobs=1):
    """Annotate every record; returns a new list sorted by utt_id."""
    config = config or PipelineConfig()
    tasks = [(record, config) for record in records]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_annotate_record, tasks, chunksize=8))
    else:
        out = [_annotate_record(task) for task in tasks]
    return sorted(out, key=lambda r: r.utt_id)


def run_clean(records, rule_set="wer_005", normalize=True):
    """Attach a CleaningVerdict per record; returns (records, summary)."""
    summary = {"kept": 0, "excluded_wer_threshold": 0,
               "excluded_insertion_or_deletion": 0, "flagged": 0}
    out = []
    for record in records:
        if record.asr_hypothesis is None:
            record.flag("no_hypothesis")
            summary["flagged"] += 1
            out.append(record)
            continue
        try:
            verdict = judge_transcript(
                record.text, record.asr_hypothesis, record.language, rule_set,
                normalize=normalize,
            )
        except CleaningError:
            record.flag("empty_reference")
            summary["flagged"] += 1
            out.append(record)
            continue
        record.cleaning = verdict
        if verdict.keep:
            summary["kept"] += 1
        else:
            summary[f"excluded_{verdict.rule}"] += 1
        out.append(record)
    return out, summary
