"""Score calibration: temperature scaling with top-k normalization.

A raw CTC posterior is overconfident: the predicted label hoards nearly
all the mass. Dividing logits by a temperature before the softmax closes
the gap, and rescoring the k most probable labels by their ratio to the
top-1 probability maps them onto [0, 1] with the winner pinned at 1.
Labels outside the top-k keep their raw (T=1) posteriors, so hopeless
candidates are not inflated. A temperature of 0 switches calibration off
and scores against raw posteriors.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .align import AlignedToken, align_words, forced_align
from .ctc import softmax_temperature
from .errors import ConfigError, KZero, NonFiniteInput
from .logits import LogitMatrix
from .vocab import Vocabulary, normalize_text

DEFAULT_TEMPERATURE = 10.0
DEFAULT_TOP_K = 3
DEFAULT_THRESHOLD = 0.5
DEFAULT_PARTIAL_BAND = (0.5, 0.75)


class Verdict(str, enum.Enum):
    CORRECT = "correct"
    PARTIAL = "partial"
    MISPRONOUNCED = "mispronounced"


@dataclass(frozen=True)
class CalibrationConfig:
    """Tunables of the scoring decision.

    temperature: softening strength; 0 disables calibration entirely.
    top_k: how many labels are rescored relative to the winner.
    threshold: scores below it are mispronounced.
    partial_band: optional [lo, hi) of scores reported as partially correct.
    """

    temperature: float = DEFAULT_TEMPERATURE
    top_k: int = DEFAULT_TOP_K
    threshold: float = DEFAULT_THRESHOLD
    partial_band: tuple[float, float] | None = DEFAULT_PARTIAL_BAND

    def __post_init__(self):
        if self.top_k < 1:
            raise KZero(f"top_k must be >= 1, got {self.top_k}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.partial_band is not None:
            lo, hi = self.partial_band
            if not (self.threshold <= lo < hi <= 1.0):
                raise ConfigError(
                    f"partial band [{lo}, {hi}) must satisfy threshold <= lo < hi <= 1"
                )
            object.__setattr__(self, "partial_band", (float(lo), float(hi)))

    def verdict(self, score: float) -> Verdict:
        if score < self.threshold:
            return Verdict.MISPRONOUNCED
        if self.partial_band is not None:
            lo, hi = self.partial_band
            if lo <= score < hi:
                return Verdict.PARTIAL
        return Verdict.CORRECT

    def merged(self, **overrides) -> "CalibrationConfig":
        """New config with the given fields replaced; None values ignored."""
        fields = {
            "temperature": self.temperature,
            "top_k": self.top_k,
            "threshold": self.threshold,
            "partial_band": self.partial_band,
        }
        for key, value in overrides.items():
            if key not in fields:
                raise ConfigError(f"unknown calibration field {key!r}")
            if value is not None:
                fields[key] = value
        return CalibrationConfig(**fields)

    def to_dict(self) -> dict:
        return {
            "T": self.temperature,
            "k": self.top_k,
            "theta": self.threshold,
            "partial": list(self.partial_band) if self.partial_band else None,
        }


def calibrate_row(z: np.ndarray, config: CalibrationConfig) -> np.ndarray:
    """Per-label scores for one logit row.

    With temperature 0 the raw posteriors come back unchanged. Otherwise
    the top-k labels (ties: lowest index) score by their scaled-probability
    ratio to the top-1 label, everything else keeps its raw posterior.
    """
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFiniteInput("logit row contains NaN or Inf")
    raw = softmax_temperature(z, 1.0)
    if config.temperature == 0:
        return raw
    scaled = softmax_temperature(z, config.temperature)
    order = np.argsort(-scaled, kind="stable")  # stable: ties keep lowest index
    k = min(config.top_k, len(z))
    top = order[:k]
    scores = raw.copy()
    # ratio to top-1 in logit space: exp((z_i - z_top1) / T), exactly 1 at top-1
    scores[top] = np.exp((z[top] - z[order[0]]) / config.temperature)
    return scores


@dataclass(frozen=True)
class TokenScore:
    token: AlignedToken
    calibrated_score: float
    verdict: Verdict


@dataclass(frozen=True)
class WordScore:
    text: str
    score: float
    verdict: Verdict
    token_start: int
    token_end: int


@dataclass(frozen=True)
class ScoredTranscript:
    target_text: str
    token_scores: tuple[TokenScore, ...]
    word_scores: tuple[WordScore, ...]
    config: CalibrationConfig

    def to_dict(self) -> dict:
        return {
            "target": self.target_text,
            "tokens": [
                {
                    "ch": ts.token.label,
                    "score": ts.calibrated_score,
                    "verdict": ts.verdict.value,
                    "frame": ts.token.emission_frame,
                }
                for ts in self.token_scores
            ],
            "words": [
                {"text": w.text, "score": w.score, "verdict": w.verdict.value}
                for w in self.word_scores
            ],
            "config": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def score_transcript(
    logits: LogitMatrix | np.ndarray,
    target_text: str,
    vocab: Vocabulary,
    config: CalibrationConfig,
    word_agg: str = "min",
) -> ScoredTranscript:
    """Align the target, score every token at its emission frame, and
    aggregate word scores.

    The word score is the minimum of its token scores by default (one bad
    character flags the word); "mean" is available for comparison runs.
    """
    if word_agg not in ("min", "mean"):
        raise ConfigError(f"word_agg must be 'min' or 'mean', got {word_agg!r}")
    values = logits.values if isinstance(logits, LogitMatrix) else LogitMatrix(values=logits).values
    normalized = normalize_text(target_text)
    path = forced_align(values, normalized, vocab)
    words = align_words(path, normalized)

    token_scores = []
    for tok in path.tokens:
        row_scores = calibrate_row(values[tok.emission_frame], config)
        score = float(row_scores[vocab.index_of(tok.label)])
        token_scores.append(
            TokenScore(token=tok, calibrated_score=score, verdict=config.verdict(score))
        )

    word_scores = []
    for w in words:
        members = [
            ts.calibrated_score
            for ts in token_scores[w.token_start : w.token_end]
            if ts.token.label != " "
        ]
        score = float(min(members)) if word_agg == "min" else float(np.mean(members))
        word_scores.append(
            WordScore(
                text=w.text,
                score=score,
                verdict=config.verdict(score),
                token_start=w.token_start,
                token_end=w.token_end,
            )
        )

    return ScoredTranscript(
        target_text=normalized,
        token_scores=tuple(token_scores),
        word_scores=tuple(word_scores),
        config=config,
    )


def flagged_tokens(scored: ScoredTranscript) -> set[int]:
    """Target indices whose verdict is mispronounced."""
    return {
        ts.token.target_index
        for ts in scored.token_scores
        if ts.verdict is Verdict.MISPRONOUNCED
    }
