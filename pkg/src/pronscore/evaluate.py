"""Evaluation stack: ground-truth labels from verbatim transcripts,
confusion counting, precision/recall/F1, temperature sweeps, and the
one-sided proportion z-test.

Mispronunciation labels live on the target text. A verbatim transcript
(what the transcriber actually heard) is aligned to the target with
word-level edit distance: substituted or deleted target words are
mispronounced, inserted verbatim words attach to nothing. Inside a
substituted pair, character-level edit distance marks the offending
target characters. Spaces carry no pronunciation and are excluded from
character-level bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .calibrate import CalibrationConfig, ScoredTranscript, Verdict, score_transcript
from .errors import (
    DegenerateReference,
    EmptyText,
    SegmentationMismatch,
    ZeroSample,
)
from .logits import LogitMatrix
from .vocab import Vocabulary, normalize_text


def normalize_for_eval(text: str) -> str:
    """NFC, lowercase, punctuation stripped (intra-word hyphens survive),
    whitespace collapsed. Casing and punctuation are orthography, not
    pronunciation."""
    text = normalize_text(text)
    kept = []
    for i, ch in enumerate(text):
        if ch.isalnum():
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
        elif ch == "-" and 0 < i < len(text) - 1 and text[i - 1].isalnum() and text[i + 1].isalnum():
            kept.append(ch)
    return " ".join("".join(kept).split())


@dataclass(frozen=True)
class MispronunciationLabels:
    """Boolean mispronunciation flags per word and per non-space character
    of the (normalized) target text."""

    target_text: str
    word_labels: tuple[bool, ...]
    char_labels: tuple[bool, ...]


def _edit_ops(src: Sequence[str], dst: Sequence[str]) -> list[tuple[str, int, int]]:
    """Unit-cost edit script aligning src to dst.

    Returns (op, i, j) triples walked left to right, op in
    {"match", "sub", "del", "ins"}; "del" means src[i] has no counterpart.
    Ties prefer diagonal, then deletion, then insertion, so the script is
    deterministic.
    """
    n, m = len(src), len(dst)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dist[i - 1][j - 1] + (src[i - 1] != dst[j - 1])
            dist[i][j] = min(sub, dist[i - 1][j] + 1, dist[i][j - 1] + 1)

    ops: list[tuple[str, int, int]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (src[i - 1] != dst[j - 1]):
            ops.append(("match" if src[i - 1] == dst[j - 1] else "sub", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(("del", i - 1, j))
            i -= 1
        else:
            ops.append(("ins", i, j - 1))
            j -= 1
    ops.reverse()
    return ops


def derive_labels(target_text: str, verbatim_text: str) -> MispronunciationLabels:
    """Mispronunciation labels for `target_text` given a verbatim
    transcription of what was actually said."""
    target = normalize_for_eval(target_text)
    verbatim = normalize_for_eval(verbatim_text)
    if not target:
        raise EmptyText("target text is empty after normalization")
    if not verbatim:
        raise EmptyText("verbatim text is empty after normalization")

    tgt_words = target.split(" ")
    vrb_words = verbatim.split(" ")
    word_labels = [False] * len(tgt_words)
    char_labels: dict[int, list[bool]] = {
        i: [False] * len(w) for i, w in enumerate(tgt_words)
    }

    for op, i, j in _edit_ops(tgt_words, vrb_words):
        if op == "del":
            word_labels[i] = True
            char_labels[i] = [True] * len(tgt_words[i])
        elif op == "sub":
            word_labels[i] = True
            flags = [False] * len(tgt_words[i])
            for cop, ci, _ in _edit_ops(tgt_words[i], vrb_words[j]):
                if cop in ("sub", "del"):
                    flags[ci] = True
            char_labels[i] = flags
        # "match" leaves the word clean; "ins" has no target unit to mark

    flat_chars = tuple(f for i in range(len(tgt_words)) for f in char_labels[i])
    return MispronunciationLabels(
        target_text=target,
        word_labels=tuple(word_labels),
        char_labels=flat_chars,
    )


@dataclass(frozen=True)
class ConfusionCounts:
    """Mispronunciation-detection tallies: caught (TR), missed (FA),
    falsely flagged (FR), correctly passed (TA)."""

    tr: int = 0
    fa: int = 0
    fr: int = 0
    ta: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tr=self.tr + other.tr,
            fa=self.fa + other.fa,
            fr=self.fr + other.fr,
            ta=self.ta + other.ta,
        )

    @property
    def total(self) -> int:
        return self.tr + self.fa + self.fr + self.ta


def count_confusions(
    flagged: Iterable[int],
    labels: MispronunciationLabels,
    level: str = "word",
) -> ConfusionCounts:
    """Tally predictions (a set of flagged unit indices) against labels at
    the given level ("word" or "char")."""
    if level == "word":
        truth = labels.word_labels
    elif level == "char":
        truth = labels.char_labels
    else:
        raise ValueError(f"level must be 'word' or 'char', got {level!r}")
    flagged = set(flagged)
    if flagged and (min(flagged) < 0 or max(flagged) >= len(truth)):
        raise SegmentationMismatch(
            f"flagged index out of range for {len(truth)} {level} units"
        )
    tr = fa = fr = ta = 0
    for i, labeled in enumerate(truth):
        predicted = i in flagged
        if predicted and labeled:
            tr += 1
        elif not predicted and labeled:
            fa += 1
        elif predicted and not labeled:
            fr += 1
        else:
            ta += 1
    return ConfusionCounts(tr=tr, fa=fa, fr=fr, ta=ta)


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    level: str

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def compute_metrics(counts: ConfusionCounts, level: str = "word") -> MetricReport:
    """Precision TR/(TR+FR), recall TR/(TR+FA), F1 their harmonic mean;
    empty denominators report 0."""
    precision = counts.tr / (counts.tr + counts.fr) if counts.tr + counts.fr else 0.0
    recall = counts.tr / (counts.tr + counts.fa) if counts.tr + counts.fa else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricReport(precision=precision, recall=recall, f1=f1, level=level)


def predicted_flags(scored: ScoredTranscript) -> tuple[set[int], set[int]]:
    """Char-level and word-level flagged index sets from a scored
    transcript; char indices run over non-space tokens only."""
    char_flags = set()
    idx = 0
    for ts in scored.token_scores:
        if ts.token.label == " ":
            continue
        if ts.verdict is Verdict.MISPRONOUNCED:
            char_flags.add(idx)
        idx += 1
    word_flags = {
        i for i, w in enumerate(scored.word_scores) if w.verdict is Verdict.MISPRONOUNCED
    }
    return char_flags, word_flags


@dataclass(frozen=True)
class EvalUtterance:
    """One corpus item ready for scoring: logits, the (eval-normalized)
    target, and its labels."""

    logits: LogitMatrix
    target: str
    labels: MispronunciationLabels


def evaluate_corpus(
    corpus: Sequence[EvalUtterance],
    vocab: Vocabulary,
    config: CalibrationConfig,
    word_agg: str = "min",
) -> tuple[ConfusionCounts, ConfusionCounts]:
    """Score every utterance and sum confusion counts; returns
    (char-level, word-level) totals."""
    char_total = ConfusionCounts()
    word_total = ConfusionCounts()
    for utt in corpus:
        scored = score_transcript(utt.logits, utt.target, vocab, config, word_agg=word_agg)
        char_flags, word_flags = predicted_flags(scored)
        char_total = char_total + count_confusions(char_flags, utt.labels, level="char")
        word_total = word_total + count_confusions(word_flags, utt.labels, level="word")
    return char_total, word_total


@dataclass(frozen=True)
class SweepPoint:
    temperature: float
    char: MetricReport
    word: MetricReport

    def to_dict(self) -> dict:
        return {
            "T": self.temperature,
            "char": self.char.to_dict(),
            "word": self.word.to_dict(),
        }


def sweep_temperature(
    corpus: Sequence[EvalUtterance],
    vocab: Vocabulary,
    temperatures: Sequence[float],
    config: CalibrationConfig,
    word_agg: str = "min",
) -> list[SweepPoint]:
    """Metrics at each temperature with all other config fields fixed;
    output order matches the input temperatures."""
    points = []
    for t in temperatures:
        cfg = config.merged(temperature=t)
        char_counts, word_counts = evaluate_corpus(corpus, vocab, cfg, word_agg=word_agg)
        points.append(
            SweepPoint(
                temperature=t,
                char=compute_metrics(char_counts, level="char"),
                word=compute_metrics(word_counts, level="word"),
            )
        )
    return points


def format_metric_table(points: Sequence[SweepPoint]) -> str:
    """Aligned plain-text table of per-temperature metrics, one row per
    level and temperature."""
    header = f"{'Level':<6} {'T':>6} {'Precision':>10} {'Recall':>10} {'F1':>10}"
    lines = [header, "-" * len(header)]
    for level in ("char", "word"):
        for pt in points:
            rep = pt.char if level == "char" else pt.word
            lines.append(
                f"{level:<6} {pt.temperature:>6g} {rep.precision:>9.1%} "
                f"{rep.recall:>9.1%} {rep.f1:>9.1%}"
            )
    return "\n".join(lines)


@dataclass(frozen=True)
class ProportionTestResult:
    count: int
    detected_rate: float
    reference_rate: float
    z: float
    p_value: float
    direction: str

    def to_dict(self) -> dict:
        return {
            "n": self.count,
            "detected_rate": self.detected_rate,
            "reference_rate": self.reference_rate,
            "z": self.z,
            "p_value": self.p_value,
            "direction": self.direction,
        }


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function, accurate
    in the far tails where 1 - Phi would cancel."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def proportion_ztest(
    detected: int,
    n: int,
    p0: float,
    direction: str = "less",
) -> ProportionTestResult:
    """One-sided one-sample proportion z-test of detected/n against the
    reference rate p0, with the variance taken under the reference."""
    if n <= 0:
        raise ZeroSample(f"sample size must be positive, got {n}")
    if not 0.0 < p0 < 1.0:
        raise DegenerateReference(f"reference rate must lie strictly in (0, 1), got {p0}")
    if direction not in ("less", "greater"):
        raise ValueError(f"direction must be 'less' or 'greater', got {direction!r}")
    p_hat = detected / n
    z = (p_hat - p0) / math.sqrt(p0 * (1.0 - p0) / n)
    p_value = normal_cdf(z) if direction == "less" else 0.5 * math.erfc(z / math.sqrt(2.0))
    return ProportionTestResult(
        count=n,
        detected_rate=p_hat,
        reference_rate=p0,
        z=z,
        p_value=p_value,
        direction=direction,
    )
