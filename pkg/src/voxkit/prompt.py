"""Serialization, parsing, and validation of the four LM prompt layouts.

A prompt is a sequence of atoms. Every atom has a class and a value; text
spans are opaque string atoms, everything else maps bijectively to an
integer id through the TokenVocabulary. The wire form is one prompt per
line, atoms as space-separated "class:value" pairs with percent-encoded
text payloads.
"""

import enum
import urllib.parse
from dataclasses import dataclass, field

from .annotate import Gender


class PromptError(Exception):
    pass


# Section-start markers, plus "sep" marking the prompt/continuation split.
MARKERS = ("content", "ref_text", "labels", "values", "global", "ref_semantic", "semantic", "sep")

GLOBAL_TOKEN_LEN = 32


class PromptLayout(enum.Enum):
    ZS_PLAIN = "zs_plain"
    ZS_PREFIX = "zs_prefix"
    CONTROL_COARSE = "control_coarse"
    CONTROL_FINE = "control_fine"


# Section names before and after the prompt/continuation split.
_LAYOUT_SECTIONS = {
    PromptLayout.ZS_PLAIN: (("content", "global"), ("semantic",)),
    PromptLayout.ZS_PREFIX: (("content", "ref_text", "global", "ref_semantic"), ("semantic",)),
    PromptLayout.CONTROL_COARSE: (("content", "labels"), ("values", "global", "semantic")),
    PromptLayout.CONTROL_FINE: (("content", "labels", "values"), ("global", "semantic")),
}


@dataclass(frozen=True)
class TokenVocabulary:
    """Contiguous, pairwise-disjoint id blocks per token class.

    Block order is frozen: markers, gender, pitch levels, speed levels,
    pitch values, speed values, global ids, semantic ids.
    """

    pitch_value_range: tuple = (0, 600)  # inclusive integer Hz range
    speed_value_range: tuple = (0, 15)  # inclusive integer SPS range
    global_size: int = 4096
    semantic_size: int = 8192
    global_token_len: int = GLOBAL_TOKEN_LEN
    _blocks: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.pitch_value_range[0] > self.pitch_value_range[1]:
            raise ValueError("bad pitch value range")
        if self.speed_value_range[0] > self.speed_value_range[1]:
            raise ValueError("bad speed value range")
        sizes = (
            ("marker", len(MARKERS)),
            ("gender", 2),
            ("pitch_level", 5),
            ("speed_level", 5),
            ("pitch_value", self.pitch_value_range[1] - self.pitch_value_range[0] + 1),
            ("speed_value", self.speed_value_range[1] - self.speed_value_range[0] + 1),
            ("global", self.global_size),
            ("semantic", self.semantic_size),
        )
        blocks = {}
        start = 0
        for cls, size in sizes:
            blocks[cls] = (start, size)
            start += size
        object.__setattr__(self, "_blocks", blocks)

    @property
    def total_size(self):
        start, size = self._blocks["semantic"]
        return start + size

    def _class_offset(self, cls, value):
        if cls == "marker":
            if value not in MARKERS:
                raise PromptError(f"unknown marker {value!r}")
            return MARKERS.index(value)
        if cls == "gender":
            return ("male", "female").index(Gender(value).value)
        if cls in ("pitch_level", "speed_level"):
            value = int(value)
            if not 0 <= value <= 4:
                raise PromptError(f"{cls} {value} out of range")
            return value
        if cls == "pitch_value":
            lo, hi = self.pitch_value_range
        elif cls == "speed_value":
            lo, hi = self.speed_value_range
        elif cls in ("global", "semantic"):
            lo, hi = 0, self._blocks[cls][1] - 1
        else:
            raise PromptError(f"unknown token class {cls!r}")
        value = int(value)
        if not lo <= value <= hi:
            raise PromptError(f"value out of vocabulary: {cls}:{value}")
        return value - lo

    def encode(self, cls, value):
        """Integer id for a (class, value) token."""
        start, _ = self._blocks[cls] if cls in self._blocks else (None, None)
        if start is None:
            raise PromptError(f"unknown token class {cls!r}")
        return start + self._class_offset(cls, value)

    def decode(self, token_id):
        """(class, value) for an integer id."""
        if not 0 <= token_id < self.total_size:
            raise PromptError(f"unknown token id {token_id}")
        for cls, (start, size) in self._blocks.items():
            if start <= token_id < start + size:
                offset = token_id - start
                if cls == "marker":
                    return cls, MARKERS[offset]
                if cls == "gender":
                    return cls, ("male", "female")[offset]
                if cls == "pitch_value":
                    return cls, offset + self.pitch_value_range[0]
                if cls == "speed_value":
                    return cls, offset + self.speed_value_range[0]
                return cls, offset
        raise PromptError(f"unknown token id {token_id}")

    def validate_atom(self, cls, value):
        """Range-check a (class, value) atom; text atoms are always valid."""
        if cls == "text":
            return
        self._class_offset(cls, value)

    def save(self, path):
        lines = ["voxkit-vocab 1"]
        for cls, (start, size) in self._blocks.items():
            lines.append(f"{cls} {start} {size}")
        lines.append(f"pitch_value_min {self.pitch_value_range[0]}")
        lines.append(f"speed_value_min {self.speed_value_range[0]}")
        lines.append(f"global_token_len {self.global_token_len}")
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            lines = [ln.strip() for ln in f if ln.strip()]
        if not lines or not lines[0].startswith("voxkit-vocab"):
            raise PromptError(f"not a vocabulary manifest: {path}")
        fields = {}
        for ln in lines[1:]:
            parts = ln.split()
            fields[parts[0]] = tuple(int(v) for v in parts[1:])
        pv_min = fields.get("pitch_value_min", (0,))[0]
        sv_min = fields.get("speed_value_min", (0,))[0]
        vocab = cls(
            pitch_value_range=(pv_min, pv_min + fields["pitch_value"][1] - 1),
            speed_value_range=(sv_min, sv_min + fields["speed_value"][1] - 1),
            global_size=fields["global"][1],
            semantic_size=fields["semantic"][1],
            global_token_len=fields.get("global_token_len", (GLOBAL_TOKEN_LEN,))[0],
        )
        for name, (start, size) in vocab._blocks.items():
            if fields.get(name, (start, size))[:2] != (start, size):
                raise PromptError(f"vocabulary block {name} does not match frozen layout")
        return vocab


DEFAULT_VOCABULARY = TokenVocabulary()


@dataclass(frozen=True)
class AttributeBundle:
    gender: Gender
    pitch_level: int
    speed_level: int
    pitch_value_hz: int | None = None
    speed_value_sps: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gender", Gender(self.gender))
        for level in (self.pitch_level, self.speed_level):
            if not 0 <= level <= 4:
                raise PromptError(f"level {level} out of range")
        if (self.pitch_value_hz is None) != (self.speed_value_sps is None):
            raise PromptError("pitch and speed fine values must be given together")

    @property
    def has_values(self):
        return self.pitch_value_hz is not None


def encode_attributes(bundle, vocab=DEFAULT_VOCABULARY, include_values=False):
    """Label token ids in fixed order: gender, pitch level, speed level,
    then the two fine-value tokens when requested."""
    ids = [
        vocab.encode("gender", bundle.gender.value),
        vocab.encode("pitch_level", bundle.pitch_level),
        vocab.encode("speed_level", bundle.speed_level),
    ]
    if include_values:
        if not bundle.has_values:
            raise PromptError("attribute bundle has no fine values")
        ids.append(vocab.encode("pitch_value", bundle.pitch_value_hz))
        ids.append(vocab.encode("speed_value", bundle.speed_value_sps))
    return ids


@dataclass(frozen=True)
class PromptSequence:
    layout: PromptLayout
    content_text: str
    ref_text: str | None = None
    attributes: AttributeBundle | None = None
    global_tokens: tuple | None = None
    ref_semantic_tokens: tuple | None = None
    semantic_tokens: tuple = ()

    def section_payloads(self):
        """Ordered (section_name, payload) pairs actually present."""
        payloads = {
            "content": self.content_text,
            "ref_text": self.ref_text,
            "labels": self.attributes,
            "values": self.attributes if (self.attributes and self.attributes.has_values) else None,
            "global": self.global_tokens,
            "ref_semantic": self.ref_semantic_tokens,
            "semantic": self.semantic_tokens if self.semantic_tokens else None,
        }
        prompt_side, continuation = _LAYOUT_SECTIONS[self.layout]
        present = []
        for name in prompt_side + continuation:
            if payloads[name] is not None:
                present.append((name, payloads[name]))
        return present


def _require(cond, message):
    if not cond:
        raise PromptError(message)


def build_prompt(
    layout,
    *,
    content_text,
    ref_text=None,
    attributes=None,
    global_tokens=None,
    ref_semantic_tokens=None,
    semantic_tokens=(),
    vocab=DEFAULT_VOCABULARY,
):
    """Assemble and validate a PromptSequence for one of the four layouts.

    Prompt-side sections are mandatory; continuation sections are optional
    but must form a prefix of the layout's continuation order.
    """
    layout = PromptLayout(layout)
    _require(isinstance(content_text, str) and content_text != "", "missing content text")
    global_tokens = tuple(int(t) for t in global_tokens) if global_tokens is not None else None
    ref_semantic_tokens = (
        tuple(int(t) for t in ref_semantic_tokens) if ref_semantic_tokens is not None else None
    )
    semantic_tokens = tuple(int(t) for t in semantic_tokens)

    if layout in (PromptLayout.ZS_PLAIN, PromptLayout.ZS_PREFIX):
        _require(attributes is None, f"extra section: labels not allowed in {layout.value}")
        _require(global_tokens is not None, "missing global tokens")
    if layout is PromptLayout.ZS_PLAIN:
        _require(ref_text is None, "extra section: ref_text not allowed in zs_plain")
        _require(ref_semantic_tokens is None, "extra section: ref_semantic not allowed in zs_plain")
    if layout is PromptLayout.ZS_PREFIX:
        _require(ref_text is not None and ref_text != "", "missing reference text")
        _require(
            ref_semantic_tokens is not None and len(ref_semantic_tokens) > 0,
            "missing reference semantic tokens",
        )
    if layout in (PromptLayout.CONTROL_COARSE, PromptLayout.CONTROL_FINE):
        _require(ref_text is None and ref_semantic_tokens is None,
                 f"extra section not allowed in {layout.value}")
        _require(attributes is not None, "missing attribute labels")
    if layout is PromptLayout.CONTROL_FINE:
        _require(attributes.has_values, "control_fine requires fine attribute values")
    if layout is PromptLayout.CONTROL_COARSE:
        # Continuation must be a prefix of values -> global -> semantic.
        if semantic_tokens:
            _require(global_tokens is not None, "semantic tokens require global tokens")
        if global_tokens is not None:
            _require(attributes.has_values, "global tokens require attribute values first")
    if layout is PromptLayout.CONTROL_FINE and semantic_tokens:
        _require(global_tokens is not None, "semantic tokens require global tokens")

    if global_tokens is not None and len(global_tokens) != vocab.global_token_len:
        raise PromptError(
            f"global token count {len(global_tokens)} != {vocab.global_token_len}"
        )

    seq = PromptSequence(
        layout=layout,
        content_text=content_text,
        ref_text=ref_text,
        attributes=attributes,
        global_tokens=global_tokens,
        ref_semantic_tokens=ref_semantic_tokens,
        semantic_tokens=semantic_tokens,
    )
    for cls, value in prompt_to_atoms(seq, vocab):
        vocab.validate_atom(cls, value)
    return seq


def prompt_to_atoms(seq, vocab=DEFAULT_VOCABULARY):
    """Flatten to (class, value) atoms: each section opens with its marker,
    and a sep marker sits at the prompt/continuation split."""
    prompt_side, _ = _LAYOUT_SECTIONS[seq.layout]
    atoms = []
    emitted_sep = False
    for name, payload in seq.section_payloads():
        if not emitted_sep and name not in prompt_side:
            atoms.append(("marker", "sep"))
            emitted_sep = True
        atoms.append(("marker", name))
        if name in ("content", "ref_text"):
            atoms.append(("text", payload))
        elif name == "labels":
            atoms.append(("gender", payload.gender.value))
            atoms.append(("pitch_level", payload.pitch_level))
            atoms.append(("speed_level", payload.speed_level))
        elif name == "values":
            atoms.append(("pitch_value", payload.pitch_value_hz))
            atoms.append(("speed_value", payload.speed_value_sps))
        elif name == "global":
            atoms.extend(("global", t) for t in payload)
        elif name in ("ref_semantic", "semantic"):
            atoms.extend(("semantic", t) for t in payload)
    if not emitted_sep:
        atoms.append(("marker", "sep"))
    return atoms


def serialize_prompt(seq, vocab=DEFAULT_VOCABULARY):
    """One-line dump: space-separated class:value atoms, text percent-encoded."""
    parts = []
    for cls, value in prompt_to_atoms(seq, vocab):
        payload = urllib.parse.quote(str(value), safe="") if cls == "text" else str(value)
        parts.append(f"{cls}:{payload}")
    return " ".join(parts)


def parse_dump_line(line):
    """Inverse of serialize_prompt's formatting: a list of atoms."""
    atoms = []
    for part in line.split():
        cls, _, payload = part.partition(":")
        if not payload and not part.endswith(":"):
            raise PromptError(f"malformed atom {part!r}")
        if cls == "text":
            atoms.append((cls, urllib.parse.unquote(payload)))
        elif cls in ("marker", "gender"):
            atoms.append((cls, payload))
        else:
            try:
                atoms.append((cls, int(payload)))
            except ValueError as exc:
                raise PromptError(f"malformed atom {part!r}") from exc
    return atoms


def _split_sections(atoms, vocab):
    sections = []  # (name, [payload atoms])
    sep_index = None
    current = None
    for cls, value in atoms:
        if cls == "marker":
            if value == "sep":
                if sep_index is not None:
                    raise PromptError("duplicate sep marker")
                sep_index = len(sections)
                current = None
                continue
            if any(name == value for name, _ in sections):
                raise PromptError(f"duplicate section {value}")
            sections.append((value, []))
            current = sections[-1][1]
        else:
            vocab.validate_atom(cls, value)
            if current is None:
                raise PromptError(f"token outside any section: {cls}")
            current.append((cls, value))
    if sep_index is None:
        raise PromptError("missing sep marker")
    return sections, sep_index


_SECTION_CLASSES = {
    "content": ("text",),
    "ref_text": ("text",),
    "labels": ("gender", "pitch_level", "speed_level"),
    "values": ("pitch_value", "speed_value"),
    "global": None,  # homogeneous "global"
    "ref_semantic": None,  # homogeneous "semantic"
    "semantic": None,
}


def _check_section(name, payload, vocab):
    expected = _SECTION_CLASSES[name]
    if expected is not None:
        classes = tuple(cls for cls, _ in payload)
        if classes != expected:
            raise PromptError(f"unknown token in section {name}: got {classes}")
        return
    homogeneous = "global" if name == "global" else "semantic"
    for cls, _ in payload:
        if cls != homogeneous:
            raise PromptError(f"unknown token in section {name}: {cls}")
    if name == "global" and len(payload) != vocab.global_token_len:
        raise PromptError(f"global token count {len(payload)} != {vocab.global_token_len}")
    if name in ("ref_semantic", "semantic") and not payload:
        raise PromptError(f"empty section {name}")


def parse_prompt(atoms, vocab=DEFAULT_VOCABULARY):
    """Recover layout and sections from an atom sequence, or reject.

    parse_prompt(prompt_to_atoms(x)) == x for every valid x.
    """
    sections, sep_index = _split_sections(atoms, vocab)
    names = tuple(name for name, _ in sections)
    for name in names:
        if name not in _SECTION_CLASSES:
            raise PromptError(f"unknown section marker {name}")
    before = names[:sep_index]
    after = names[sep_index:]

    layout = None
    for cand, (prompt_side, continuation) in _LAYOUT_SECTIONS.items():
        if before == prompt_side and after == continuation[: len(after)]:
            layout = cand
            break
    if layout is None:
        known = set().union(*(set(p) | set(c) for p, c in _LAYOUT_SECTIONS.values()))
        if set(names) <= known:
            raise PromptError(f"sections out of order or incomplete: {names}")
        raise PromptError(f"ambiguous layout for sections {names}")

    payloads = {}
    for name, payload in sections:
        _check_section(name, payload, vocab)
        payloads[name] = payload

    attributes = None
    if "labels" in payloads:
        labels = dict(payloads["labels"])
        values = dict(payloads.get("values", []))
        attributes = AttributeBundle(
            gender=labels["gender"],
            pitch_level=labels["pitch_level"],
            speed_level=labels["speed_level"],
            pitch_value_hz=values.get("pitch_value"),
            speed_value_sps=values.get("speed_value"),
        )
    return PromptSequence(
        layout=layout,
        content_text=payloads["content"][0][1],
        ref_text=payloads["ref_text"][0][1] if "ref_text" in payloads else None,
        attributes=attributes,
        global_tokens=tuple(v for _, v in payloads["global"]) if "global" in payloads else None,
        ref_semantic_tokens=(
            tuple(v for _, v in payloads["ref_semantic"]) if "ref_semantic" in payloads else None
        ),
        semantic_tokens=tuple(v for _, v in payloads.get("semantic", [])),
    )


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    expected_class: str


def continuation_plan(layout, vocab=DEFAULT_VOCABULARY):
    """(class, count) steps the model must emit after the split; count None
    means unbounded."""
    layout = PromptLayout(layout)
    if layout in (PromptLayout.ZS_PLAIN, PromptLayout.ZS_PREFIX):
        return (("semantic", None),)
    if layout is PromptLayout.CONTROL_COARSE:
        return (
            ("pitch_value", 1),
            ("speed_value", 1),
            ("global", vocab.global_token_len),
            ("semantic", None),
        )
    return (("global", vocab.global_token_len), ("semantic", None))


def validate_continuation(prompt, generated, vocab=DEFAULT_VOCABULARY):
    """Incremental verdicts for a generated token stream.

    Each token must match the class the layout's chain-of-thought state
    machine expects next; the state advances only on accepted tokens.
    """
    plan = continuation_plan(prompt.layout, vocab)
    step = 0
    emitted = 0
    verdicts = []
    for cls, value in generated:
        expected_cls, count = plan[step]
        ok = cls == expected_cls
        if ok:
            try:
                vocab.validate_atom(cls, value)
            except PromptError:
                ok = False
        verdicts.append(Verdict(accepted=ok, expected_class=expected_cls))
        if ok:
            emitted += 1
            if count is not None and emitted == count:
                step += 1
                emitted = 0
    return verdicts
