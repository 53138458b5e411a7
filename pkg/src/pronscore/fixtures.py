"""Bundled demo fixtures: tiny logit containers plus the default phrase
list, so the CLI selfcheck, the file-backend service, and the practice UI
all work without an acoustic model.

Fixture logits are synthesized as log posteriors: each frame is a near
one-hot row for its intended symbol, with blank-dominant frames between
symbols. The *_swap fixtures plant one frame whose evidence points at a
different character while the target character keeps a small posterior,
the canonical shape of an overconfident CTC error.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .logits import LogitMatrix, write_ctcl_file
from .vocab import Vocabulary, default_vocabulary

DEFAULT_PHRASES = [
    {"id": "banan", "text": "banan"},
    {"id": "dyr", "text": "dyr"},
    {"id": "kanske", "text": "kanske"},
    {"id": "sjunga", "text": "jag tycker om att sjunga"},
    {"id": "kina", "text": "han kommer från kina"},
    {"id": "ata-har", "text": "vill du äta här"},
    {"id": "gymmet", "text": "på kvällen är jag på gymmet"},
]


def posterior_frames(rows: list[dict[str, float]], vocab: Vocabulary) -> LogitMatrix:
    """Logits whose T=1 softmax reproduces the given per-frame posterior
    sketches; unnamed labels share the leftover mass uniformly."""
    floor = 1e-9
    values = np.zeros((len(rows), len(vocab)))
    for i, spec in enumerate(rows):
        p = np.full(len(vocab), floor)
        named = 0.0
        for label, prob in spec.items():
            p[vocab.index_of(label)] = prob
            named += prob
        rest = [j for j in range(len(vocab)) if vocab.labels[j] not in spec]
        if rest and named < 1.0:
            p[rest] = (1.0 - named) / len(rest)
        values[i] = np.log(p / p.sum())
    return LogitMatrix(values=values)


def _spelled(text: str, vocab: Vocabulary, swap: dict[int, dict[str, float]] | None = None):
    """Frame rows spelling `text` with blanks around every symbol; `swap`
    overrides the posterior sketch at the given character indexes."""
    blank = vocab.blank_label
    rows: list[dict[str, float]] = [{blank: 0.998}]
    for i, ch in enumerate(text):
        if swap and i in swap:
            rows.append(swap[i])
        else:
            rows.append({ch: 0.998})
        rows.append({blank: 0.998})
    return rows


def build_fixture(name: str, vocab: Vocabulary | None = None) -> tuple[LogitMatrix, str]:
    """Named demo fixture: (logits, target_text)."""
    vocab = vocab or default_vocabulary()
    targets = {
        "dyr_correct": ("dyr", None),
        # evidence says "dir": y keeps a small posterior, rescued by top-k
        "dyr_yswap": ("dyr", {1: {"i": 0.998, "y": 1e-3, vocab.blank_label: 9.9e-4}}),
        "banan_correct": ("banan", None),
        # evidence says "panan": hopeless b, stays flagged at any temperature
        "banan_bswap": ("banan", {0: {"p": 0.998, "b": 1e-6, vocab.blank_label: 9.9e-4}}),
        "kanske_correct": ("kanske", None),
    }
    if name not in targets:
        raise KeyError(f"unknown fixture {name!r}; have {sorted(targets)}")
    text, swap = targets[name]
    return posterior_frames(_spelled(text, vocab, swap), vocab), text


FIXTURE_NAMES = ("dyr_correct", "dyr_yswap", "banan_correct", "banan_bswap", "kanske_correct")


def write_fixture_dir(directory: str) -> None:
    """Materialize every fixture plus vocab.json and phrases.json into a
    directory usable as a file-backend root."""
    import os

    os.makedirs(directory, exist_ok=True)
    vocab = default_vocabulary()
    vocab.save(os.path.join(directory, "vocab.json"))
    with open(os.path.join(directory, "phrases.json"), "w", encoding="utf-8") as fh:
        json.dump(DEFAULT_PHRASES, fh, ensure_ascii=False, indent=2)
    for name in FIXTURE_NAMES:
        logits, _ = build_fixture(name, vocab)
        write_ctcl_file(os.path.join(directory, f"{name}.ctcl"), logits, vocab)


def packaged_fixture_dir() -> str:
    """Path of the fixtures shipped inside the installed package."""
    return str(resources.files("pronscore").joinpath("fixtures"))
