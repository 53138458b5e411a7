"""Command-line interface.

One binary, subcommand style. Machine-readable JSON goes to stdout;
human diagnostics go to stderr. Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .align import align_words, forced_align
from .calibrate import CalibrationConfig, calibrate_row, score_transcript
from .dataprep import filter_manifest, read_manifest, speaker_split, write_manifest
from .errors import PronScoreError
from .evaluate import (
    EvalUtterance,
    compute_metrics,
    derive_labels,
    evaluate_corpus,
    format_metric_table,
    proportion_ztest,
    sweep_temperature,
)
from .fixtures import build_fixture, packaged_fixture_dir
from .logits import read_ctcl, read_ctcl_file, write_ctcl_file
from .vocab import Vocabulary, default_vocabulary


def _env(name: str, default):
    return os.environ.get(f"PRONSCORE_{name}", default)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--T", type=float, default=10.0, help="temperature; 0 disables calibration")
    parser.add_argument("--k", type=int, default=3, help="top-k size")
    parser.add_argument("--theta", type=float, default=0.5, help="mispronunciation threshold")
    parser.add_argument(
        "--partial",
        default="0.5,0.75",
        help="partially-correct band as lo,hi or 'none'",
    )


def _config_from(args: argparse.Namespace, temperature: float | None = None) -> CalibrationConfig:
    if args.partial.strip().lower() == "none":
        band = None
    else:
        lo, hi = (float(x) for x in args.partial.split(","))
        band = (lo, hi)
    return CalibrationConfig(
        temperature=args.T if temperature is None else temperature,
        top_k=args.k,
        threshold=args.theta,
        partial_band=band,
    )


def _load_eval_corpus(manifest_path: str):
    entries = read_manifest(manifest_path)
    corpus: list[EvalUtterance] = []
    vocab: Vocabulary | None = None
    for entry in entries:
        if not os.path.isfile(entry.logits_path):
            raise PronScoreError(
                f"utterance {entry.id!r}: logits file not found: {entry.logits_path}"
            )
        logits, file_vocab = read_ctcl_file(entry.logits_path)
        if vocab is None:
            vocab = file_vocab
        elif file_vocab.labels != vocab.labels:
            raise PronScoreError(f"utterance {entry.id!r}: vocabulary differs from the corpus")
        verbatim = entry.verbatim if entry.verbatim is not None else entry.target
        labels = derive_labels(entry.target, verbatim)
        corpus.append(EvalUtterance(logits=logits, target=labels.target_text, labels=labels))
    if vocab is None:
        raise PronScoreError(f"manifest {manifest_path!r} is empty")
    return corpus, vocab


def _cmd_align(args) -> int:
    logits, vocab = read_ctcl_file(args.logits)
    path = forced_align(logits, args.target, vocab)
    words = align_words(path, args.target)
    out = path.to_dict()
    out["words"] = [
        {"text": w.text, "token_start": w.token_start, "token_end": w.token_end} for w in words
    ]
    print(json.dumps(out, ensure_ascii=False))
    return 0


def _cmd_score(args) -> int:
    logits, vocab = read_ctcl_file(args.logits)
    scored = score_transcript(
        logits, args.target, vocab, _config_from(args), word_agg=args.word_agg
    )
    print(scored.to_json())
    return 0


def _cmd_eval(args) -> int:
    from .evaluate import SweepPoint

    corpus, vocab = _load_eval_corpus(args.manifest)
    config = _config_from(args)
    char_counts, word_counts = evaluate_corpus(corpus, vocab, config, word_agg=args.word_agg)
    char_report = compute_metrics(char_counts, level="char")
    word_report = compute_metrics(word_counts, level="word")
    reports = {"char": char_report.to_dict(), "word": word_report.to_dict()}
    print(json.dumps(reports[args.level] if args.level else reports, ensure_ascii=False))
    point = SweepPoint(temperature=config.temperature, char=char_report, word=word_report)
    print(format_metric_table([point]), file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    corpus, vocab = _load_eval_corpus(args.manifest)
    temperatures = [float(t) for t in args.T_list.split(",")]
    points = sweep_temperature(
        corpus, vocab, temperatures, _config_from(args, temperature=temperatures[0]),
        word_agg=args.word_agg,
    )
    print(json.dumps([p.to_dict() for p in points], ensure_ascii=False))
    print(format_metric_table(points), file=sys.stderr)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "T", "precision", "recall", "f1"])
            for pt in points:
                for level, rep in (("char", pt.char), ("word", pt.word)):
                    writer.writerow([level, pt.temperature, rep.precision, rep.recall, rep.f1])
    return 0


def _cmd_ztest(args) -> int:
    result = proportion_ztest(args.detected, args.n, args.p0, args.direction)
    print(json.dumps(result.to_dict()))
    return 0


def _cmd_prep(args) -> int:
    entries = read_manifest(args.manifest)
    if args.prep_command == "filter":
        kept = filter_manifest(
            entries, args.min_dur, args.max_dur, drop_overlap=not args.keep_overlap
        )
        write_manifest(args.out, kept)
        print(json.dumps({"kept": len(kept), "dropped": len(entries) - len(kept)}))
    else:
        train, dev = speaker_split(entries, args.train_fraction, args.seed)
        write_manifest(args.train_out, train)
        write_manifest(args.dev_out, dev)
        print(
            json.dumps(
                {
                    "train_entries": len(train),
                    "dev_entries": len(dev),
                    "train_speakers": len({e.speaker_id for e in train}),
                    "dev_speakers": len({e.speaker_id for e in dev}),
                }
            )
        )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_settings, create_app

    config = _config_from(args)
    settings = build_settings(
        vocab_path=args.vocab,
        phrases_path=args.phrases,
        logits_dir=args.logits_dir,
        remote_endpoint=args.endpoint,
        remote_timeout=args.timeout,
        config=config,
    )
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _check(name: str, ok: bool, detail: str, results: list) -> None:
    results.append({"check": name, "ok": bool(ok), "detail": detail})
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=sys.stderr)


def _cmd_selfcheck(args) -> int:
    results: list[dict] = []

    # temperature + top-k rescoring of an overconfident four-label row
    raw = np.array([0.998, 1e-3, 1e-5, 9.9e-4])
    scores = calibrate_row(np.log(raw), CalibrationConfig(temperature=10.0, top_k=3))
    expected = np.array([1.0, 0.50, 1e-5, 0.50])
    ok = bool(np.all(np.abs(scores - expected) <= 0.01))
    _check("calibrate-row", ok, f"scores {np.round(scores, 4).tolist()} vs {expected.tolist()} +-0.01", results)

    # regression rates for the proportion z-test, pinned to published precision
    for detected, n, p0, direction, reported in (
        (12, 230, 0.120, "less", 8e-4),
        (11, 172, 0.158, "less", 3e-4),
        (59, 187, 0.141, "greater", 4e-12),
    ):
        p = proportion_ztest(detected, n, p0, direction).p_value
        unit = 10.0 ** math.floor(math.log10(reported))
        _check(
            f"ztest-{detected}-{n}",
            abs(p - reported) <= unit,
            f"p={p:.3e} vs {reported:.0e} within {unit:.0e}",
            results,
        )

    # shipped fixtures keep their verdicts
    fixture_dir = packaged_fixture_dir()
    vocab = default_vocabulary()
    expectations = [
        ("dyr_correct", 10.0, "correct"),
        ("dyr_yswap", 10.0, "partial"),
        ("dyr_yswap", 0.0, "mispronounced"),
        ("banan_bswap", 10.0, "mispronounced"),
        ("kanske_correct", 0.0, "correct"),
    ]
    for name, temperature, want in expectations:
        path = os.path.join(fixture_dir, f"{name}.ctcl")
        logits, file_vocab = read_ctcl_file(path)
        _, target = build_fixture(name, vocab)
        scored = score_transcript(
            logits, target, file_vocab, CalibrationConfig(temperature=temperature)
        )
        got = scored.word_scores[0].verdict.value
        _check(f"fixture-{name}-T{temperature:g}", got == want, f"word {got!r}, want {want!r}", results)

    # container round trip is bit-exact
    logits, target = build_fixture("dyr_correct", vocab)
    tmp = os.path.join(os.getcwd(), ".selfcheck_roundtrip.ctcl")
    try:
        write_ctcl_file(tmp, logits, vocab)
        with open(tmp, "rb") as fh:
            blob1 = fh.read()
        re_logits, re_vocab = read_ctcl(blob1)
        write_ctcl_file(tmp, re_logits, re_vocab)
        with open(tmp, "rb") as fh:
            blob2 = fh.read()
        _check("ctcl-roundtrip", blob1 == blob2, f"{len(blob1)} bytes stable", results)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)

    all_ok = all(r["ok"] for r in results)
    print(json.dumps({"ok": all_ok, "checks": results}))
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pronscore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="forced-align a target against a logit container")
    p_align.add_argument("--logits", required=True)
    p_align.add_argument("--target", required=True)
    p_align.set_defaults(func=_cmd_align)

    p_score = sub.add_parser("score", help="score a target pronunciation")
    p_score.add_argument("--logits", required=True)
    p_score.add_argument("--target", required=True)
    p_score.add_argument("--word-agg", choices=("min", "mean"), default="min")
    _add_config_flags(p_score)
    p_score.set_defaults(func=_cmd_score)

    p_eval = sub.add_parser("eval", help="metrics over a JSON-lines manifest")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--level", choices=("char", "word"), default=None)
    p_eval.add_argument("--word-agg", choices=("min", "mean"), default="min")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="metrics across a temperature grid")
    p_sweep.add_argument("--manifest", required=True)
    p_sweep.add_argument("--T-list", dest="T_list", required=True, help="comma-separated temperatures")
    p_sweep.add_argument("--csv", default=None, help="also write rows to this CSV file")
    p_sweep.add_argument("--word-agg", choices=("min", "mean"), default="min")
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ztest = sub.add_parser("ztest", help="one-sided proportion z-test")
    p_ztest.add_argument("--detected", type=int, required=True)
    p_ztest.add_argument("--n", type=int, required=True)
    p_ztest.add_argument("--p0", type=float, required=True)
    p_ztest.add_argument("--direction", choices=("less", "greater"), required=True)
    p_ztest.set_defaults(func=_cmd_ztest)

    p_prep = sub.add_parser("prep", help="manifest filtering and speaker splits")
    prep_sub = p_prep.add_subparsers(dest="prep_command", required=True)
    p_filter = prep_sub.add_parser("filter")
    p_filter.add_argument("--manifest", required=True)
    p_filter.add_argument("--out", required=True)
    p_filter.add_argument("--min-dur", type=float, default=2.0)
    p_filter.add_argument("--max-dur", type=float, default=25.0)
    p_filter.add_argument("--keep-overlap", action="store_true")
    p_filter.set_defaults(func=_cmd_prep)
    p_split = prep_sub.add_parser("split")
    p_split.add_argument("--manifest", required=True)
    p_split.add_argument("--train-fraction", type=float, default=0.82)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--train-out", required=True)
    p_split.add_argument("--dev-out", required=True)
    p_split.set_defaults(func=_cmd_prep)

    p_serve = sub.add_parser("serve", help="run the HTTP scoring service")
    p_serve.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=int(_env("PORT", "8570")))
    p_serve.add_argument("--vocab", default=_env("VOCAB", None))
    p_serve.add_argument("--phrases", default=_env("PHRASES", None))
    p_serve.add_argument("--logits-dir", default=_env("LOGITS_DIR", None))
    p_serve.add_argument("--endpoint", default=_env("ENDPOINT", None))
    p_serve.add_argument("--timeout", type=float, default=float(_env("TIMEOUT", "10")))
    _add_config_flags(p_serve)
    p_serve.set_defaults(func=_cmd_serve)

    p_self = sub.add_parser("selfcheck", help="built-in regression suite over shipped fixtures")
    p_self.set_defaults(func=_cmd_selfcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PronScoreError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
