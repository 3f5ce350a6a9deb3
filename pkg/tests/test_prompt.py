import pytest

from voxkit.prompt import (
    DEFAULT_VOCABULARY,
    GLOBAL_TOKEN_LEN,
    AttributeBundle,
    MARKERS,
    PromptError,
    PromptLayout,
    TokenVocabulary,
    build_prompt,
    continuation_plan,
    encode_attributes,
    parse_dump_line,
    parse_prompt,
    prompt_to_atoms,
    serialize_prompt,
    validate_continuation,
)

SMALL = TokenVocabulary(global_size=16, semantic_size=32, global_token_len=3)

GLOBALS = tuple(range(GLOBAL_TOKEN_LEN))
LABELS = AttributeBundle(gender="female", pitch_level=2, speed_level=3)
FULL = AttributeBundle(gender="male", pitch_level=1, speed_level=4,
                       pitch_value_hz=180, speed_value_sps=4)


def build_examples():
    return {
        PromptLayout.ZS_PLAIN: build_prompt(
            "zs_plain", content_text="hello there",
            global_tokens=GLOBALS, semantic_tokens=(5, 6, 7),
        ),
        PromptLayout.ZS_PREFIX: build_prompt(
            "zs_prefix", content_text="hello there", ref_text="prior words",
            global_tokens=GLOBALS, ref_semantic_tokens=(1, 2, 3),
            semantic_tokens=(9, 10),
        ),
        PromptLayout.CONTROL_COARSE: build_prompt(
            "control_coarse", content_text="say it slowly", attributes=FULL,
            global_tokens=GLOBALS, semantic_tokens=(4,),
        ),
        PromptLayout.CONTROL_FINE: build_prompt(
            "control_fine", content_text="say it quickly", attributes=FULL,
            global_tokens=GLOBALS, semantic_tokens=(11, 12),
        ),
    }


# ---------------------------------------------------------------------------
# vocabulary
# ---------------------------------------------------------------------------

def test_vocab_blocks_disjoint_and_contiguous():
    vocab = DEFAULT_VOCABULARY
    blocks = sorted(vocab._blocks.values())
    assert blocks[0][0] == 0
    for (s1, n1), (s2, _) in zip(blocks, blocks[1:]):
        assert s1 + n1 == s2
    assert vocab.total_size == sum(n for _, n in blocks)


def test_vocab_encode_decode_bijection():
    vocab = SMALL
    seen = set()
    for token_id in range(vocab.total_size):
        cls, value = vocab.decode(token_id)
        assert vocab.encode(cls, value) == token_id
        seen.add((cls, value))
    assert len(seen) == vocab.total_size


def test_vocab_marker_ids():
    for i, marker in enumerate(MARKERS):
        assert DEFAULT_VOCABULARY.encode("marker", marker) == i


def test_vocab_out_of_range():
    with pytest.raises(PromptError, match="out of vocabulary"):
        DEFAULT_VOCABULARY.encode("pitch_value", 601)
    with pytest.raises(PromptError):
        DEFAULT_VOCABULARY.encode("semantic", 8192)
    with pytest.raises(PromptError):
        DEFAULT_VOCABULARY.decode(DEFAULT_VOCABULARY.total_size)


def test_vocab_manifest_roundtrip(tmp_path):
    path = tmp_path / "vocab.txt"
    SMALL.save(path)
    loaded = TokenVocabulary.load(path)
    assert loaded == SMALL


def test_vocab_manifest_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("hello\n")
    with pytest.raises(PromptError):
        TokenVocabulary.load(path)


def test_encode_attributes_order():
    vocab = DEFAULT_VOCABULARY
    ids = encode_attributes(FULL, vocab, include_values=True)
    assert ids == [
        vocab.encode("gender", "male"),
        vocab.encode("pitch_level", 1),
        vocab.encode("speed_level", 4),
        vocab.encode("pitch_value", 180),
        vocab.encode("speed_value", 4),
    ]
    with pytest.raises(PromptError):
        encode_attributes(LABELS, vocab, include_values=True)


def test_attribute_bundle_values_together():
    with pytest.raises(PromptError):
        AttributeBundle(gender="male", pitch_level=0, speed_level=0, pitch_value_hz=100)


# ---------------------------------------------------------------------------
# build / serialize / parse round trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("layout", list(PromptLayout))
def test_build_parse_identity(layout):
    seq = build_examples()[layout]
    atoms = prompt_to_atoms(seq)
    parsed = parse_prompt(atoms)
    assert parsed == seq
    assert parsed.layout is layout


@pytest.mark.parametrize("layout", list(PromptLayout))
def test_dump_line_roundtrip(layout):
    seq = build_examples()[layout]
    line = serialize_prompt(seq)
    assert "\n" not in line
    assert parse_prompt(parse_dump_line(line)) == seq


def test_dump_percent_encodes_text():
    seq = build_prompt("zs_plain", content_text="a b:c%d",
                       global_tokens=GLOBALS, semantic_tokens=(1,))
    line = serialize_prompt(seq)
    token = [p for p in line.split() if p.startswith("text:")][0]
    assert " " not in token and token.count(":") == 1
    assert parse_prompt(parse_dump_line(line)).content_text == "a b:c%d"


def test_sep_position_per_layout():
    marks = {
        PromptLayout.ZS_PLAIN: ["content", "global", "sep", "semantic"],
        PromptLayout.ZS_PREFIX: ["content", "ref_text", "global", "ref_semantic", "sep", "semantic"],
        PromptLayout.CONTROL_COARSE: ["content", "labels", "sep", "values", "global", "semantic"],
        PromptLayout.CONTROL_FINE: ["content", "labels", "values", "sep", "global", "semantic"],
    }
    for layout, seq in build_examples().items():
        got = [v for c, v in prompt_to_atoms(seq) if c == "marker"]
        assert got == marks[layout]


def test_prompt_side_only_parses():
    seq = build_prompt("control_coarse", content_text="x", attributes=LABELS)
    atoms = prompt_to_atoms(seq)
    assert atoms[-1] == ("marker", "sep")
    parsed = parse_prompt(atoms)
    assert parsed.layout is PromptLayout.CONTROL_COARSE
    assert parsed.global_tokens is None and parsed.semantic_tokens == ()


# ---------------------------------------------------------------------------
# build errors
# ---------------------------------------------------------------------------

def test_build_zs_prefix_missing_ref_text():
    with pytest.raises(PromptError, match="reference text"):
        build_prompt("zs_prefix", content_text="x", global_tokens=GLOBALS,
                     ref_semantic_tokens=(1,))


def test_build_zs_plain_rejects_ref():
    with pytest.raises(PromptError, match="ref_text"):
        build_prompt("zs_plain", content_text="x", ref_text="y",
                     global_tokens=GLOBALS)


def test_build_rejects_wrong_global_count():
    with pytest.raises(PromptError, match="global token count"):
        build_prompt("zs_plain", content_text="x", global_tokens=(1, 2, 3))


def test_build_control_fine_requires_values():
    with pytest.raises(PromptError, match="fine attribute values"):
        build_prompt("control_fine", content_text="x", attributes=LABELS)


def test_build_continuation_prefix_rule():
    # semantic without global on the continuation side is not a valid prefix
    with pytest.raises(PromptError, match="require global"):
        build_prompt("control_fine", content_text="x", attributes=FULL,
                     semantic_tokens=(1, 2))


def test_build_value_out_of_vocabulary():
    bad = AttributeBundle(gender="male", pitch_level=0, speed_level=0,
                          pitch_value_hz=900, speed_value_sps=3)
    with pytest.raises(PromptError, match="out of vocabulary"):
        build_prompt("control_fine", content_text="x", attributes=bad,
                     global_tokens=GLOBALS)


# ---------------------------------------------------------------------------
# parse errors
# ---------------------------------------------------------------------------

def test_parse_out_of_order_sections():
    seq = build_examples()[PromptLayout.ZS_PLAIN]
    atoms = prompt_to_atoms(seq)
    sep = atoms.index(("marker", "sep"))
    shuffled = atoms[sep:] + atoms[:sep]
    with pytest.raises(PromptError):
        parse_prompt(shuffled)


def test_parse_label_token_inside_global():
    seq = build_examples()[PromptLayout.CONTROL_FINE]
    atoms = prompt_to_atoms(seq)
    idx = atoms.index(("marker", "global")) + 2
    atoms[idx] = ("pitch_level", 3)
    with pytest.raises(PromptError, match="unknown token in section"):
        parse_prompt(atoms)


def test_parse_wrong_global_count():
    seq = build_examples()[PromptLayout.ZS_PLAIN]
    atoms = [a for a in prompt_to_atoms(seq)]
    atoms.remove(("global", 0))
    with pytest.raises(PromptError, match="global token count"):
        parse_prompt(atoms)


def test_parse_missing_sep():
    atoms = [("marker", "content"), ("text", "hi")]
    with pytest.raises(PromptError, match="sep"):
        parse_prompt(atoms)


def test_parse_duplicate_section():
    atoms = [("marker", "content"), ("text", "hi"),
             ("marker", "content"), ("text", "again"), ("marker", "sep")]
    with pytest.raises(PromptError, match="duplicate"):
        parse_prompt(atoms)


def test_parse_dump_malformed():
    with pytest.raises(PromptError):
        parse_dump_line("global:notanumber")


# ---------------------------------------------------------------------------
# continuation validation
# ---------------------------------------------------------------------------

def test_continuation_plan_shapes():
    assert continuation_plan("zs_plain") == (("semantic", None),)
    assert continuation_plan("control_coarse", SMALL) == (
        ("pitch_value", 1), ("speed_value", 1), ("global", 3), ("semantic", None),
    )
    assert continuation_plan("control_fine", SMALL) == (
        ("global", 3), ("semantic", None),
    )


def test_validate_continuation_coarse_happy_path():
    prompt = build_prompt("control_coarse", content_text="x", attributes=LABELS,
                          vocab=SMALL)
    stream = [("pitch_value", 200), ("speed_value", 4),
              ("global", 1), ("global", 2), ("global", 3),
              ("semantic", 7), ("semantic", 8)]
    verdicts = validate_continuation(prompt, stream, SMALL)
    assert all(v.accepted for v in verdicts)
    assert [v.expected_class for v in verdicts] == [
        "pitch_value", "speed_value", "global", "global", "global",
        "semantic", "semantic",
    ]


def test_validate_continuation_rejects_wrong_class():
    prompt = build_prompt("control_coarse", content_text="x", attributes=LABELS,
                          vocab=SMALL)
    stream = [("semantic", 1), ("pitch_value", 100), ("speed_value", 2),
              ("semantic", 3), ("global", 0)]
    verdicts = validate_continuation(prompt, stream, SMALL)
    assert [v.accepted for v in verdicts] == [False, True, True, False, True]
    # the rejected tokens did not advance the state machine
    assert verdicts[3].expected_class == "global"


def test_validate_continuation_global_to_semantic_transition():
    prompt = build_prompt("control_fine", content_text="x", attributes=FULL,
                          vocab=SMALL)
    stream = [("global", 0), ("global", 1), ("global", 2),
              ("global", 3), ("semantic", 5)]
    verdicts = validate_continuation(prompt, stream, SMALL)
    # the 4th global lands after the count is filled and must be rejected
    assert [v.accepted for v in verdicts] == [True, True, True, False, True]


def test_validate_continuation_out_of_range_value():
    prompt = build_prompt("zs_plain", content_text="x", global_tokens=(0, 1, 2),
                          vocab=SMALL)
    verdicts = validate_continuation(prompt, [("semantic", 31), ("semantic", 32)], SMALL)
    assert [v.accepted for v in verdicts] == [True, False]
