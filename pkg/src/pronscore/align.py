"""CTC forced alignment: Viterbi over the blank-extended target.

The best path assigns every frame to one trellis state; the frames a
target token occupies form one contiguous run. CTC output is peaky, so a
token's evidence concentrates in a single frame: the emission frame is
the in-span frame with the highest T=1 posterior for the token's label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ctc import NEG_INF, encode_target, extended_states, log_softmax, min_ctc_frames, _skip_allowed
from .errors import InfeasibleTarget, TokenMismatch
from .logits import LogitMatrix
from .vocab import Vocabulary, normalize_text


@dataclass(frozen=True)
class AlignedToken:
    label: str
    target_index: int
    span_start: int
    span_end: int  # inclusive
    emission_frame: int
    raw_posterior: float


@dataclass(frozen=True)
class AlignmentPath:
    tokens: tuple[AlignedToken, ...]
    total_log_prob: float

    def to_dict(self) -> dict:
        return {
            "tokens": [
                {
                    "label": t.label,
                    "target_index": t.target_index,
                    "span": [t.span_start, t.span_end],
                    "emission_frame": t.emission_frame,
                    "raw_posterior": t.raw_posterior,
                }
                for t in self.tokens
            ],
            "total_log_prob": self.total_log_prob,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@dataclass(frozen=True)
class WordSpan:
    text: str
    token_start: int
    token_end: int  # exclusive index into AlignmentPath.tokens


def forced_align(
    logits: LogitMatrix | np.ndarray,
    target: str | Sequence[int],
    vocab: Vocabulary,
) -> AlignmentPath:
    """Maximum-probability CTC path for `target`, backtracked to per-token
    frame spans.

    Ties are broken deterministically: prefer staying in the current
    trellis state, otherwise the lowest predecessor state index.
    """
    values = logits.values if isinstance(logits, LogitMatrix) else LogitMatrix(values=logits).values
    tokens = encode_target(target, vocab)
    n_frames = values.shape[0]
    if n_frames < min_ctc_frames(tokens):
        raise InfeasibleTarget(
            f"{n_frames} frames cannot emit a target needing {min_ctc_frames(tokens)}"
        )

    blank = vocab.blank_index
    ext = extended_states(tokens, blank)
    skip = _skip_allowed(ext, blank)
    n_states = len(ext)

    lp = log_softmax(values)
    emit = lp[:, ext]  # (T, S)

    score = np.full((n_frames, n_states), NEG_INF)
    back = np.full((n_frames, n_states), -1, dtype=np.int64)
    score[0, 0] = emit[0, 0]
    score[0, 1] = emit[0, 1]
    back[0, 0] = 0
    back[0, 1] = 1
    for t in range(1, n_frames):
        prev = score[t - 1]
        for s in range(n_states):
            cands = [(prev[s], s)]
            if s >= 1:
                cands.append((prev[s - 1], s - 1))
            if s >= 2 and skip[s]:
                cands.append((prev[s - 2], s - 2))
            best_val = max(v for v, _ in cands)
            winners = [cs for v, cs in cands if v == best_val]
            # ties: stay in the current state if possible, else lowest index
            best_s = s if s in winners else min(winners)
            score[t, s] = best_val + emit[t, s]
            back[t, s] = best_s

    final_states = (n_states - 2, n_states - 1)  # lowest index first
    end_state = max(final_states, key=lambda s: (score[-1, s], -s))
    total = float(score[-1, end_state])

    states = np.empty(n_frames, dtype=np.int64)
    states[-1] = end_state
    for t in range(n_frames - 1, 0, -1):
        states[t - 1] = back[t, states[t]]

    posteriors = np.exp(lp)
    aligned: list[AlignedToken] = []
    t = 0
    while t < n_frames:
        s = states[t]
        run_end = t
        while run_end + 1 < n_frames and states[run_end + 1] == s:
            run_end += 1
        if s % 2 == 1:  # non-blank state: one target token
            tok_idx = int(s - 1) // 2
            label_idx = tokens[tok_idx]
            span = posteriors[t : run_end + 1, label_idx]
            emission = t + int(np.argmax(span))
            aligned.append(
                AlignedToken(
                    label=vocab.labels[label_idx],
                    target_index=tok_idx,
                    span_start=t,
                    span_end=run_end,
                    emission_frame=emission,
                    raw_posterior=float(posteriors[emission, label_idx]),
                )
            )
        t = run_end + 1

    return AlignmentPath(tokens=tuple(aligned), total_log_prob=total)


def align_words(path: AlignmentPath, target_text: str) -> list[WordSpan]:
    """Group consecutive non-space aligned tokens into words, split at
    space tokens. Space tokens belong to no word; empty groups (leading,
    trailing, or doubled spaces) are dropped.
    """
    normalized = normalize_text(target_text)
    if len(path.tokens) != len(normalized) or any(
        tok.label != ch for tok, ch in zip(path.tokens, normalized)
    ):
        raise TokenMismatch("alignment tokens do not spell the target text")

    words: list[WordSpan] = []
    start = None
    for i, tok in enumerate(path.tokens):
        if tok.label == " ":
            if start is not None:
                words.append(WordSpan(text=normalized[start:i], token_start=start, token_end=i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        words.append(
            WordSpan(text=normalized[start:], token_start=start, token_end=len(path.tokens))
        )
    return words
