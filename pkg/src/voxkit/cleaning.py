"""Transcript-quality filtering: normalization, edit alignment, WER, and the
two exclusion rule sets used during corpus cleaning."""

import enum
import re
import unicodedata
from dataclasses import dataclass

from .annotate import Language


class CleaningError(Exception):
    pass


@dataclass(frozen=True)
class EditAlignment:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    def __post_init__(self):
        if min(self.substitutions, self.deletions, self.insertions, self.ref_len) < 0:
            raise ValueError("alignment counts must be nonnegative")
        if self.substitutions + self.deletions > self.ref_len:
            raise ValueError("S + D cannot exceed reference length")

    @property
    def total_edits(self):
        return self.substitutions + self.deletions + self.insertions


class RuleSet(enum.Enum):
    WER_005 = "wer_005"  # keep iff WER <= 0.05
    NO_INS_DEL = "no_ins_del"  # keep iff no insertions and no deletions


@dataclass(frozen=True)
class CleaningVerdict:
    keep: bool
    rule: str  # "none" | "wer_threshold" | "insertion_or_deletion"
    wer: float


def _strip_punctuation(text):
    return "".join(
        " " if unicodedata.category(ch).startswith("P") else ch for ch in text
    )


def normalize_text(text, language):
    """Case-fold, strip punctuation, collapse whitespace. Chinese text drops
    whitespace entirely since tokens are single characters."""
    language = Language(language)
    folded = _strip_punctuation(text.casefold())
    if language is Language.CHINESE:
        return re.sub(r"\s+", "", folded)
    return re.sub(r"\s+", " ", folded).strip()


def tokenize(text, language):
    """English: space-separated words. Chinese: one token per character."""
    language = Language(language)
    if language is Language.CHINESE:
        return [ch for ch in text if not ch.isspace()]
    return text.split()


# Tie-breaking among minimum-cost alignments prefers the fewest
# insertions+deletions. Both components are additive along an alignment, so
# minimizing cost * _LEX + (I + D) as a single scalar is an exact
# lexicographic DP; _LEX just has to exceed any reachable I + D.
_LEX = 1 << 20


def align(ref_tokens, hyp_tokens):
    """Levenshtein alignment minimizing S+D+I, then I+D among cost ties."""
    ref = list(ref_tokens)
    hyp = list(hyp_tokens)
    n, m = len(ref), len(hyp)
    if n == 0:
        raise CleaningError("empty reference")

    prev = [(j * (_LEX + 1)) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [i * (_LEX + 1)] + [0] * m
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ri == hyp[j - 1] else _LEX)
            dele = prev[j] + _LEX + 1
            ins = cur[j - 1] + _LEX + 1
            cur[j] = min(sub, dele, ins)
        prev = cur

    cost, insdel = divmod(prev[m], _LEX)
    # S = cost - (I+D); D - I is fixed by the length difference.
    subs = cost - insdel
    dels = (insdel + (n - m)) // 2
    inss = insdel - dels
    return EditAlignment(substitutions=subs, deletions=dels, insertions=inss, ref_len=n)


def word_error_rate(alignment):
    """(S + D + I) / ref_len; unbounded above."""
    if alignment.ref_len == 0:
        raise CleaningError("zero-length reference")
    return alignment.total_edits / alignment.ref_len


def character_error_rate(ref_text, hyp_text, language=Language.CHINESE):
    """CER = WER over per-character tokens (the Chinese tokenization path)."""
    ref = tokenize(ref_text, Language.CHINESE)
    hyp = tokenize(hyp_text, Language.CHINESE)
    return word_error_rate(align(ref, hyp))


def apply_cleaning_rule(alignment, rule_set):
    """wer_005: exclude iff WER strictly exceeds 0.05.
    no_ins_del: exclude iff any insertion or deletion (substitutions pass)."""
    rule_set = RuleSet(rule_set)
    wer = word_error_rate(alignment)
    if rule_set is RuleSet.WER_005:
        if wer > 0.05:
            return CleaningVerdict(keep=False, rule="wer_threshold", wer=wer)
        return CleaningVerdict(keep=True, rule="none", wer=wer)
    if alignment.insertions > 0 or alignment.deletions > 0:
        return CleaningVerdict(keep=False, rule="insertion_or_deletion", wer=wer)
    return CleaningVerdict(keep=True, rule="none", wer=wer)


def judge_transcript(ref_text, hyp_text, language, rule_set, normalize=True):
    """Full path from raw transcript pair to a verdict."""
    if normalize:
        ref_text = normalize_text(ref_text, language)
        hyp_text = normalize_text(hyp_text, language)
    ref = tokenize(ref_text, language)
    if not ref:
        raise CleaningError("empty reference after normalization")
    hyp = tokenize(hyp_text, language)
    return apply_cleaning_rule(align(ref, hyp), rule_set)
