"""Command-line interface: annotate / clean / stats / boundaries / prompt /
quantize over line-delimited manifests and token dumps.

Exit codes: 0 success, 1 record-level errors without --lenient, 2 usage error.
"""

import argparse
import json
import random
import sys

import numpy as np

from .annotate import (
    PITCH_PERCENTILES,
    SPEED_PERCENTILES,
    AnnotationError,
    derive_boundaries,
)
from .audio.mel import hz_to_mel
from .pipeline import (
    ClassifierClientConfig,
    ManifestError,
    PipelineConfig,
    fetch_external_labels,
    read_manifest,
    render_stats_text,
    run_annotate,
    run_clean,
    run_stats,
    write_manifest,
)
from .prompt import (
    DEFAULT_VOCABULARY,
    AttributeBundle,
    PromptError,
    PromptLayout,
    TokenVocabulary,
    build_prompt,
    parse_dump_line,
    parse_prompt,
    serialize_prompt,
    validate_continuation,
)
from .quantizers import (
    DEFAULT_FSQ_CONFIG,
    FsqConfig,
    QuantizerError,
    VqCodebook,
    fsq_quantize_batch,
    vq_quantize_batch,
)

# Flags that count as record-level errors for the exit code.
ERROR_FLAGS = {
    "decode_failed",
    "unvoiced",
    "pitch_failed",
    "zero_syllables",
    "empty_voiced_span",
    "unlabeled",
    "no_hypothesis",
    "empty_reference",
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="voxkit")
    parser.add_argument("--config", help="pipeline configuration (YAML)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--lenient", action="store_true",
                        help="continue past record-level errors and exit 0")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized fixture generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="annotate pitch/speed/duration")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", help="sidecar label file for gender/age/emotion")
    p.add_argument("--endpoint", help="classifier HTTP endpoint")

    p = sub.add_parser("clean", help="attach transcript cleaning verdicts")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--rule", choices=["wer_005", "no_ins_del"], default=None)
    p.add_argument("--no-normalize", action="store_true")

    p = sub.add_parser("stats", help="corpus statistics report")
    p.add_argument("manifest")
    p.add_argument("--json-out", help="also write machine-readable stats")

    p = sub.add_parser("boundaries", help="derive level boundaries from a manifest column")
    p.add_argument("manifest")
    p.add_argument("--field", choices=["pitch", "speed"], required=True)
    p.add_argument("--percentiles", help="four comma-separated fractions")

    p = sub.add_parser("prompt", help="build/parse/validate prompt dumps")
    p.add_argument("action", choices=["build", "parse", "validate", "sample"])
    p.add_argument("--vocab", help="vocabulary manifest path")
    p.add_argument("--layout", choices=[l.value for l in PromptLayout])
    p.add_argument("--content")
    p.add_argument("--ref-text")
    p.add_argument("--gender", choices=["male", "female"])
    p.add_argument("--pitch-level", type=int)
    p.add_argument("--speed-level", type=int)
    p.add_argument("--pitch-value", type=int)
    p.add_argument("--speed-value", type=int)
    p.add_argument("--global-tokens", help="comma-separated global token ids")
    p.add_argument("--ref-semantic", help="comma-separated reference semantic ids")
    p.add_argument("--semantic", help="comma-separated semantic ids")
    p.add_argument("--line", help="prompt dump line (parse/validate)")
    p.add_argument("--input", help="file of prompt dump lines (parse)")
    p.add_argument("--generated", help="generated atoms, space-separated class:value")
    p.add_argument("--count", type=int, default=1, help="prompts to sample")

    p = sub.add_parser("quantize", help="file-to-file FSQ/VQ of .npy vectors")
    p.add_argument("--kind", choices=["fsq", "vq"], required=True)
    p.add_argument("--input", required=True, help=".npy matrix of row vectors")
    p.add_argument("--output", required=True, help=".npy int64 indices")
    p.add_argument("--levels", help="FSQ levels per dim, comma-separated")
    p.add_argument("--codebook", help="VQ codebook file")
    return parser


def _int_list(text):
    return [int(v) for v in text.split(",")] if text else None


def _load_records(args):
    records, errors = read_manifest(args.manifest, lenient=args.lenient)
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    return records, bool(errors)


def _record_errors(records):
    return sum(1 for r in records if ERROR_FLAGS & set(r.flags))


def _cmd_annotate(args, config):
    records, had_errors = _load_records(args)
    if args.sidecar or args.endpoint or config.classifier:
        if args.sidecar:
            client = ClassifierClientConfig(mode="sidecar_file", path=args.sidecar)
        elif args.endpoint:
            client = ClassifierClientConfig(mode="http_endpoint", endpoint=args.endpoint)
        else:
            client = ClassifierClientConfig(**config.classifier)
        records = fetch_external_labels(records, client)
    records = run_annotate(records, config, jobs=args.jobs)
    write_manifest(records, args.out)
    bad = _record_errors(records)
    if bad:
        print(f"{bad} record(s) flagged", file=sys.stderr)
    return 0 if args.lenient or (bad == 0 and not had_errors) else 1


def _cmd_clean(args, config):
    records, had_errors = _load_records(args)
    rule = args.rule or config.rule_set
    normalize = config.normalize_before_wer and not args.no_normalize
    records, summary = run_clean(records, rule_set=rule, normalize=normalize)
    write_manifest(records, args.out)
    for key, value in summary.items():
        print(f"{key}: {value}")
    bad = summary["flagged"]
    return 0 if args.lenient or (bad == 0 and not had_errors) else 1


def _cmd_stats(args, _config):
    records, had_errors = _load_records(args)
    stats = run_stats(records)
    sys.stdout.write(render_stats_text(stats))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as f:
            json.dump(stats.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    return 0 if args.lenient or not had_errors else 1


def _cmd_boundaries(args, _config):
    records, had_errors = _load_records(args)
    if args.field == "pitch":
        values = [hz_to_mel(r.pitch.fine_value_hz) for r in records if r.pitch is not None]
        default_ps, unit = PITCH_PERCENTILES, "mel"
    else:
        values = [float(r.speed.fine_value_sps) for r in records if r.speed is not None]
        default_ps, unit = SPEED_PERCENTILES, "sps"
    ps = tuple(float(v) for v in args.percentiles.split(",")) if args.percentiles else default_ps
    bounds = derive_boundaries(values, ps, unit)
    print(" ".join(f"{c:g}" for c in bounds.cuts))
    return 0 if args.lenient or not had_errors else 1


def _sample_prompt(rng, vocab):
    layout = rng.choice(list(PromptLayout))
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"]
    text = " ".join(rng.choices(words, k=rng.randint(1, 6)))
    kwargs = {"content_text": text, "vocab": vocab}
    glob = tuple(rng.randrange(vocab.global_size) for _ in range(vocab.global_token_len))
    sem = tuple(rng.randrange(vocab.semantic_size) for _ in range(rng.randint(1, 20)))
    if layout is PromptLayout.ZS_PLAIN:
        kwargs["global_tokens"] = glob
        if rng.random() < 0.5:
            kwargs["semantic_tokens"] = sem
    elif layout is PromptLayout.ZS_PREFIX:
        kwargs["ref_text"] = " ".join(rng.choices(words, k=rng.randint(1, 4)))
        kwargs["global_tokens"] = glob
        kwargs["ref_semantic_tokens"] = tuple(
            rng.randrange(vocab.semantic_size) for _ in range(rng.randint(1, 20))
        )
        if rng.random() < 0.5:
            kwargs["semantic_tokens"] = sem
    else:
        has_values = layout is PromptLayout.CONTROL_FINE or rng.random() < 0.5
        bundle = AttributeBundle(
            gender=rng.choice(["male", "female"]),
            pitch_level=rng.randrange(5),
            speed_level=rng.randrange(5),
            pitch_value_hz=rng.randint(*vocab.pitch_value_range) if has_values else None,
            speed_value_sps=rng.randint(*vocab.speed_value_range) if has_values else None,
        )
        kwargs["attributes"] = bundle
        if has_values and rng.random() < 0.5:
            kwargs["global_tokens"] = glob
            if rng.random() < 0.5:
                kwargs["semantic_tokens"] = sem
    return build_prompt(layout, **kwargs)


def _prompt_to_doc(seq):
    doc = {"layout": seq.layout.value, "content_text": seq.content_text}
    if seq.ref_text is not None:
        doc["ref_text"] = seq.ref_text
    if seq.attributes is not None:
        doc["attributes"] = {
            "gender": seq.attributes.gender.value,
            "pitch_level": seq.attributes.pitch_level,
            "speed_level": seq.attributes.speed_level,
        }
        if seq.attributes.has_values:
            doc["attributes"]["pitch_value_hz"] = seq.attributes.pitch_value_hz
            doc["attributes"]["speed_value_sps"] = seq.attributes.speed_value_sps
    if seq.global_tokens is not None:
        doc["global_tokens"] = list(seq.global_tokens)
    if seq.ref_semantic_tokens is not None:
        doc["ref_semantic_tokens"] = list(seq.ref_semantic_tokens)
    if seq.semantic_tokens:
        doc["semantic_tokens"] = list(seq.semantic_tokens)
    return doc


def _cmd_prompt(args, _config):
    vocab = TokenVocabulary.load(args.vocab) if args.vocab else DEFAULT_VOCABULARY
    if args.action == "build":
        if not args.layout or not args.content:
            raise UsageError("prompt build requires --layout and --content")
        attributes = None
        if args.gender is not None:
            attributes = AttributeBundle(
                gender=args.gender,
                pitch_level=args.pitch_level or 0,
                speed_level=args.speed_level or 0,
                pitch_value_hz=args.pitch_value,
                speed_value_sps=args.speed_value,
            )
        seq = build_prompt(
            args.layout,
            content_text=args.content,
            ref_text=args.ref_text,
            attributes=attributes,
            global_tokens=_int_list(args.global_tokens),
            ref_semantic_tokens=_int_list(args.ref_semantic),
            semantic_tokens=_int_list(args.semantic) or (),
            vocab=vocab,
        )
        print(serialize_prompt(seq, vocab))
        return 0
    if args.action == "parse":
        if args.line:
            lines = [args.line]
        elif args.input:
            with open(args.input, encoding="utf-8") as f:
                lines = [ln for ln in (ln.strip() for ln in f) if ln]
        else:
            raise UsageError("prompt parse requires --line or --input")
        failures = 0
        for line in lines:
            try:
                seq = parse_prompt(parse_dump_line(line), vocab)
                print(json.dumps(_prompt_to_doc(seq), sort_keys=True))
            except PromptError as exc:
                failures += 1
                print(f"error: {exc}", file=sys.stderr)
        return 0 if args.lenient or failures == 0 else 1
    if args.action == "validate":
        if not args.line or args.generated is None:
            raise UsageError("prompt validate requires --line and --generated")
        seq = parse_prompt(parse_dump_line(args.line), vocab)
        generated = parse_dump_line(args.generated)
        verdicts = validate_continuation(seq, generated, vocab)
        for (cls, value), verdict in zip(generated, verdicts):
            status = "accept" if verdict.accepted else "reject"
            print(f"{status} {cls}:{value} expected={verdict.expected_class}")
        return 0 if all(v.accepted for v in verdicts) else 1
    # sample
    rng = random.Random(args.seed)
    for _ in range(args.count):
        print(serialize_prompt(_sample_prompt(rng, vocab), vocab))
    return 0


def _cmd_quantize(args, _config):
    vectors = np.load(args.input)
    if args.kind == "fsq":
        config = FsqConfig(tuple(_int_list(args.levels))) if args.levels else DEFAULT_FSQ_CONFIG
        indices = fsq_quantize_batch(vectors, config)
    else:
        if not args.codebook:
            raise UsageError("vq quantize requires --codebook")
        codebook = VqCodebook.load(args.codebook)
        indices = vq_quantize_batch(vectors, codebook)
    np.save(args.output, indices)
    print(f"wrote {len(indices)} indices to {args.output}")
    return 0


class UsageError(Exception):
    pass


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    except (OSError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "annotate": _cmd_annotate,
        "clean": _cmd_clean,
        "stats": _cmd_stats,
        "boundaries": _cmd_boundaries,
        "prompt": _cmd_prompt,
        "quantize": _cmd_quantize,
    }
    try:
        return handlers[args.command](args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ManifestError, AnnotationError, PromptError, QuantizerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
