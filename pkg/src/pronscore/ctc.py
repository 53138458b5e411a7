"""Temperature softmax and entropy-regularized CTC loss.

All trellis work runs in log space over the blank-extended target
(blank, c1, blank, c2, ..., blank). Probabilities underflow beyond a
hundred frames or so, hence the log-sum-exp primitives throughout.

The entropy term is the Shannon entropy of the conditional distribution
over feasible frame-level paths. Writing P for the total target
probability and S for the first moment sum(p * log p) over paths, the
entropy is H = log P - S / P. S is tracked with companion forward and
backward recursions: extending a path of probability p by an emission y
turns p*log(p) into p*y*(log p + log y), so the moment trellis needs both
the plain trellis value and the emission's log y at every step. Since
every path probability is <= 1, the negated moment is non-negative and
can itself be carried in log space without sign bookkeeping.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmptyTarget,
    InfeasibleTarget,
    InstanceTooLarge,
    NonFiniteInput,
    NonPositiveTemperature,
    UnknownToken,
)
from .logits import LogitMatrix
from .vocab import Vocabulary

NEG_INF = float("-inf")


def softmax_temperature(z: np.ndarray, temperature: float) -> np.ndarray:
    """Softmax of z / temperature, stable against large logits.

    Dividing by the temperature before the softmax softens (T > 1) or
    sharpens (T < 1) the distribution without moving the argmax.
    """
    if not temperature > 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature}")
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFiniteInput("logits contain NaN or Inf")
    shifted = (z - np.max(z, axis=-1, keepdims=True)) / temperature
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise log softmax at T=1; finite for all finite inputs."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def posterior_matrix(logits: "LogitMatrix | np.ndarray", temperature: float = 1.0) -> np.ndarray:
    """Frames x labels probability matrix: each row sums to 1 and every
    entry lies in [0, 1]."""
    values = logits.values if isinstance(logits, LogitMatrix) else np.asarray(logits)
    return softmax_temperature(values, temperature)


def min_ctc_frames(tokens: Sequence[int]) -> int:
    """Fewest frames that can emit `tokens`: one per token plus a blank
    between each adjacent repeated pair."""
    repeats = sum(1 for a, b in zip(tokens, tokens[1:]) if a == b)
    return len(tokens) + repeats


def encode_target(target: str | Sequence[int], vocab: Vocabulary) -> list[int]:
    """Turn a target into label indices, rejecting blanks and unknowns."""
    if isinstance(target, str):
        tokens = vocab.encode(target)
    else:
        tokens = [int(t) for t in target]
        for t in tokens:
            if not 0 <= t < len(vocab):
                raise UnknownToken(f"token index {t} outside vocabulary of size {len(vocab)}")
    if any(t == vocab.blank_index for t in tokens):
        raise UnknownToken("target may not contain the blank symbol")
    if not tokens:
        raise EmptyTarget("target is empty")
    return tokens


def extended_states(tokens: Sequence[int], blank: int) -> np.ndarray:
    """Blank-extended state labels: blank, t0, blank, t1, ..., blank."""
    ext = np.full(2 * len(tokens) + 1, blank, dtype=np.int64)
    ext[1::2] = tokens
    return ext


def _skip_allowed(ext: np.ndarray, blank: int) -> np.ndarray:
    """skip[s] is True when state s may be entered from s-2 (distinct
    non-blank labels; never into a blank state)."""
    skip = np.zeros(len(ext), dtype=bool)
    skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])
    return skip


def _shift1(row: np.ndarray) -> np.ndarray:
    out = np.empty_like(row)
    out[0] = NEG_INF
    out[1:] = row[:-1]
    return out


def _shift2(row: np.ndarray) -> np.ndarray:
    out = np.full_like(row, NEG_INF)
    out[2:] = row[:-2]
    return out


@dataclass(frozen=True)
class CtcLossResult:
    """Loss value (nats), path-distribution entropy (nats), and the
    analytic gradient of the loss w.r.t. the logits."""

    loss: float
    path_entropy: float
    gradient: np.ndarray


def ctc_loss(
    logits: LogitMatrix | np.ndarray,
    target: str | Sequence[int],
    vocab: Vocabulary,
    beta: float = 0.0,
) -> CtcLossResult:
    """Negative log likelihood of `target` minus beta times the entropy of
    the conditional path distribution, with the exact gradient.

    beta is a fraction in [0, 1] (a regularizer strength of "20%" is 0.2).
    With beta = 0 this is the standard CTC loss.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    values = logits.values if isinstance(logits, LogitMatrix) else LogitMatrix(values=logits).values
    tokens = encode_target(target, vocab)
    n_frames, n_labels = values.shape
    if n_frames < min_ctc_frames(tokens):
        raise InfeasibleTarget(
            f"{n_frames} frames cannot emit a target needing {min_ctc_frames(tokens)}"
        )

    blank = vocab.blank_index
    ext = extended_states(tokens, blank)
    skip = _skip_allowed(ext, blank)
    n_states = len(ext)

    lp = log_softmax(values)  # (T, V) log posteriors
    m = -lp  # -log y >= 0
    with np.errstate(divide="ignore"):
        ln_m = np.where(m > 0, np.log(np.where(m > 0, m, 1.0)), NEG_INF)
    emit = lp[:, ext]  # (T, S)
    emit_m = ln_m[:, ext]

    # Forward trellis (la) and negated-first-moment companion (lt), both in
    # log space; emissions are included at the current frame.
    la = np.full((n_frames, n_states), NEG_INF)
    lt = np.full((n_frames, n_states), NEG_INF)
    la[0, 0] = emit[0, 0]
    lt[0, 0] = emit[0, 0] + emit_m[0, 0]
    if n_states > 1:
        la[0, 1] = emit[0, 1]
        lt[0, 1] = emit[0, 1] + emit_m[0, 1]
    for t in range(1, n_frames):
        prev_a, prev_t = la[t - 1], lt[t - 1]
        sum_a = np.logaddexp(prev_a, _shift1(prev_a))
        sum_t = np.logaddexp(prev_t, _shift1(prev_t))
        sum_a = np.where(skip, np.logaddexp(sum_a, _shift2(prev_a)), sum_a)
        sum_t = np.where(skip, np.logaddexp(sum_t, _shift2(prev_t)), sum_t)
        la[t] = emit[t] + sum_a
        lt[t] = emit[t] + np.logaddexp(sum_t, emit_m[t] + sum_a)

    log_p = np.logaddexp(la[-1, -1], la[-1, -2]) if n_states > 1 else la[-1, -1]
    log_tau = np.logaddexp(lt[-1, -1], lt[-1, -2]) if n_states > 1 else lt[-1, -1]
    tau_over_p = np.exp(log_tau - log_p)
    entropy = max(float(log_p + tau_over_p), 0.0)
    loss = float(-log_p - beta * entropy) + 0.0  # +0.0 normalizes -0.0

    # Backward trellis, mirrored; successor skip from s lands on s+2.
    lb = np.full((n_frames, n_states), NEG_INF)
    lv = np.full((n_frames, n_states), NEG_INF)
    lb[-1, -1] = emit[-1, -1]
    lv[-1, -1] = emit[-1, -1] + emit_m[-1, -1]
    if n_states > 1:
        lb[-1, -2] = emit[-1, -2]
        lv[-1, -2] = emit[-1, -2] + emit_m[-1, -2]
    skip_from = np.zeros(n_states, dtype=bool)
    skip_from[: n_states - 2] = skip[2:]
    for t in range(n_frames - 2, -1, -1):
        nxt_b, nxt_v = lb[t + 1], lv[t + 1]
        sum_b = np.logaddexp(nxt_b, _shift1(nxt_b[::-1])[::-1])
        sum_v = np.logaddexp(nxt_v, _shift1(nxt_v[::-1])[::-1])
        sum_b = np.where(skip_from, np.logaddexp(sum_b, _shift2(nxt_b[::-1])[::-1]), sum_b)
        sum_v = np.where(skip_from, np.logaddexp(sum_v, _shift2(nxt_v[::-1])[::-1]), sum_v)
        lb[t] = emit[t] + sum_b
        lv[t] = emit[t] + np.logaddexp(sum_v, emit_m[t] + sum_b)

    # Per-state occupancy and moment sums, normalized by P. The emission at
    # frame t is counted by both half-trellises, hence the -emit correction.
    gamma = np.exp(la + lb - emit - log_p)  # paths through (t, s) / P
    moment_pos = np.logaddexp(lt + lb, la + lv)
    moment_neg = emit_m + la + lb
    tau_state = np.exp(moment_pos - emit - log_p) - np.exp(moment_neg - emit - log_p)
    np.maximum(tau_state, 0.0, out=tau_state)

    occ = np.zeros((n_labels, n_frames))
    mom = np.zeros((n_labels, n_frames))
    np.add.at(occ, ext, gamma.T)
    np.add.at(mom, ext, tau_state.T)
    occ = occ.T  # (T, V): prob mass of paths emitting label k at frame t, / P
    mom = mom.T  # (T, V): negated moment of those paths, / P

    y = np.exp(lp)
    gradient = y - occ - beta * (mom - tau_over_p * occ)
    return CtcLossResult(loss=loss, path_entropy=entropy, gradient=gradient)


def collapse(path: Sequence[int], blank: int) -> list[int]:
    """CTC collapse: merge consecutive repeats, then drop blanks."""
    merged = [k for k, _ in itertools.groupby(path)]
    return [k for k in merged if k != blank]


MAX_ENUM_FRAMES = 8
MAX_ENUM_VOCAB = 5


def enumerate_paths(
    logits: LogitMatrix | np.ndarray,
    target: str | Sequence[int],
    vocab: Vocabulary,
) -> list[tuple[tuple[str, ...], float]]:
    """Every frame-level label sequence that collapses to `target`, with its
    product probability under the row softmax. Brute-force test oracle;
    guarded against combinatorial blowup.
    """
    values = logits.values if isinstance(logits, LogitMatrix) else LogitMatrix(values=logits).values
    n_frames, n_labels = values.shape
    if n_frames > MAX_ENUM_FRAMES or n_labels > MAX_ENUM_VOCAB:
        raise InstanceTooLarge(
            f"enumeration limited to {MAX_ENUM_FRAMES} frames x {MAX_ENUM_VOCAB} labels, "
            f"got {n_frames} x {n_labels}"
        )
    tokens = encode_target(target, vocab)
    probs = softmax_temperature(values, 1.0)
    out = []
    for path in itertools.product(range(n_labels), repeat=n_frames):
        if collapse(path, vocab.blank_index) != tokens:
            continue
        p = float(np.prod([probs[t, k] for t, k in enumerate(path)]))
        out.append((tuple(vocab.labels[k] for k in path), p))
    return out
