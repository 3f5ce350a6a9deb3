"""Corpus statistics: totals by gender, level histograms, text report."""

from dataclasses import dataclass

from ..annotate import PITCH_LEVEL_NAMES, SPEED_LEVEL_NAMES
from ..audio.mel import hz_to_mel


class StatsError(Exception):
    pass


# Histogram axes: duration in 1 s bins to 20 s, pitch in 25 Mel bins over
# 50..500 Mel, speaking rate in 1 SPS bins to 15; one overflow bin each.
DURATION_BIN_S = 1.0
DURATION_MAX_S = 20.0
MEL_BIN = 25.0
MEL_MIN, MEL_MAX = 50.0, 500.0
SPS_BIN = 1.0
SPS_MAX = 15.0


@dataclass(frozen=True)
class CorpusStats:
    utterance_count: int
    total_duration_h: float
    duration_by_gender_h: dict  # male / female / unknown
    pitch_level_hist: tuple  # counts per level 0..4
    speed_level_hist: tuple
    duration_hist: tuple
    pitch_mel_hist: tuple
    speed_sps_hist: tuple

    def to_dict(self):
        return {
            "utterance_count": self.utterance_count,
            "total_duration_h": round(self.total_duration_h, 6),
            "duration_by_gender_h": {
                k: round(v, 6) for k, v in sorted(self.duration_by_gender_h.items())
            },
            "pitch_level_hist": list(self.pitch_level_hist),
            "speed_level_hist": list(self.speed_level_hist),
            "duration_hist": list(self.duration_hist),
            "pitch_mel_hist": list(self.pitch_mel_hist),
            "speed_sps_hist": list(self.speed_sps_hist),
        }


def _bin_index(value, width, lo, n_bins):
    idx = int((value - lo) // width)
    return min(max(idx, 0), n_bins - 1)


def run_stats(records):
    records = list(records)
    if not records:
        raise StatsError("empty manifest")

    n_dur = int(DURATION_MAX_S / DURATION_BIN_S) + 1
    n_mel = int((MEL_MAX - MEL_MIN) / MEL_BIN) + 1
    n_sps = int(SPS_MAX / SPS_BIN) + 1
    duration_hist = [0] * n_dur
    mel_hist = [0] * n_mel
    sps_hist = [0] * n_sps
    pitch_levels = [0] * 5
    speed_levels = [0] * 5
    by_gender = {"male": 0.0, "female": 0.0, "unknown": 0.0}
    total_s = 0.0

    for record in records:
        dur = record.duration_s or 0.0
        total_s += dur
        key = record.gender.value if record.gender is not None else "unknown"
        by_gender[key] += dur
        duration_hist[_bin_index(dur, DURATION_BIN_S, 0.0, n_dur)] += 1
        if record.pitch is not None:
            pitch_levels[record.pitch.level] += 1
            mel_hist[_bin_index(hz_to_mel(record.pitch.fine_value_hz), MEL_BIN, MEL_MIN, n_mel)] += 1
        if record.speed is not None:
            speed_levels[record.speed.level] += 1
            sps_hist[_bin_index(record.speed.fine_value_sps, SPS_BIN, 0.0, n_sps)] += 1

    return CorpusStats(
        utterance_count=len(records),
        total_duration_h=total_s / 3600.0,
        duration_by_gender_h={k: v / 3600.0 for k, v in by_gender.items()},
        pitch_level_hist=tuple(pitch_levels),
        speed_level_hist=tuple(speed_levels),
        duration_hist=tuple(duration_hist),
        pitch_mel_hist=tuple(mel_hist),
        speed_sps_hist=tuple(sps_hist),
    )


def _render_hist(title, labels, counts, width=40):
    peak = max(counts) if any(counts) else 1
    lines = [title]
    for label, count in zip(labels, counts):
        bar = "#" * int(round(width * count / peak)) if peak else ""
        lines.append(f"  {label:>12} {count:>8d} {bar}")
    return lines


def render_stats_text(stats):
    """Deterministic plain-text report (same input -> identical bytes)."""
    lines = [
        f"utterances      {stats.utterance_count}",
        f"total duration  {stats.total_duration_h:.4f} h",
    ]
    for key in ("male", "female", "unknown"):
        lines.append(f"  {key:<8} {stats.duration_by_gender_h[key]:.4f} h")
    lines += _render_hist("pitch levels", PITCH_LEVEL_NAMES, stats.pitch_level_hist)
    lines += _render_hist("speed levels", SPEED_LEVEL_NAMES, stats.speed_level_hist)

    dur_labels = [f"{i * DURATION_BIN_S:.0f}-{(i + 1) * DURATION_BIN_S:.0f}s"
                  for i in range(len(stats.duration_hist) - 1)] + [f">={DURATION_MAX_S:.0f}s"]
    lines += _render_hist("duration", dur_labels, stats.duration_hist)

    mel_labels = [f"{MEL_MIN + i * MEL_BIN:.0f}mel" for i in range(len(stats.pitch_mel_hist) - 1)]
    mel_labels += [f">={MEL_MAX:.0f}mel"]
    lines += _render_hist("pitch (mel)", mel_labels, stats.pitch_mel_hist)

    sps_labels = [f"{i:.0f}sps" for i in range(len(stats.speed_sps_hist) - 1)] + [f">={SPS_MAX:.0f}sps"]
    lines += _render_hist("speaking rate", sps_labels, stats.speed_sps_hist)
    return "\n".join(lines) + "\n"
