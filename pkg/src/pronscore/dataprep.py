"""Manifest filtering and speaker-disjoint splitting.

Manifests are JSON lines, one utterance per line:
  {"id": ..., "speaker_id": ..., "duration": ..., "region": ...,
   "target": ..., "verbatim": ..., "logits_path": ..., "overlapping": ...}
Only id/speaker_id/duration are required for prep; evaluation reads
id/logits_path/target/verbatim from the same format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidBounds, TooFewSpeakers


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    speaker_id: str = ""
    duration: float = 0.0
    region: str | None = None
    target: str = ""
    verbatim: str | None = None
    logits_path: str = ""
    overlapping: bool = False

    def to_dict(self) -> dict:
        out = {"id": self.id}
        if self.speaker_id:
            out["speaker_id"] = self.speaker_id
        if self.duration:
            out["duration"] = self.duration
        if self.region is not None:
            out["region"] = self.region
        if self.target:
            out["target"] = self.target
        if self.verbatim is not None:
            out["verbatim"] = self.verbatim
        if self.logits_path:
            out["logits_path"] = self.logits_path
        if self.overlapping:
            out["overlapping"] = True
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ManifestEntry":
        return cls(
            id=str(data["id"]),
            speaker_id=str(data.get("speaker_id", "")),
            duration=float(data.get("duration", 0.0)),
            region=data.get("region"),
            target=str(data.get("target", "")),
            verbatim=data.get("verbatim"),
            logits_path=str(data.get("logits_path", "")),
            overlapping=bool(data.get("overlapping", False)),
        )


def read_manifest(path: str) -> list[ManifestEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(ManifestEntry.from_dict(json.loads(line)))
    return entries


def write_manifest(path: str, entries: Iterable[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")


def filter_manifest(
    entries: Sequence[ManifestEntry],
    min_dur: float,
    max_dur: float,
    drop_overlap: bool = True,
) -> list[ManifestEntry]:
    """Entries with min_dur <= duration <= max_dur, optionally dropping
    overlapping speech; order preserved, entries untouched."""
    if not min_dur < max_dur:
        raise InvalidBounds(f"need min_dur < max_dur, got [{min_dur}, {max_dur}]")
    return [
        e
        for e in entries
        if min_dur <= e.duration <= max_dur and not (drop_overlap and e.overlapping)
    ]


class _Lcg64:
    """64-bit linear congruential generator (Knuth MMIX multiplier
    6364136223846793005, increment 1442695040888963407, modulus 2**64).
    Pinned here so the same seed reproduces the same split in any
    implementation of this tool."""

    _MULT = 6364136223846793005
    _INC = 1442695040888963407
    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state * self._MULT + self._INC) & self._MASK
        return self.state

    def below(self, bound: int) -> int:
        return self.next_u64() % bound


def speaker_split(
    entries: Sequence[ManifestEntry],
    train_fraction: float,
    seed: int,
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """Partition entries by speaker into train and dev sets.

    The sorted speaker list is Fisher-Yates shuffled with the seeded LCG
    above, then the first round(train_fraction * #speakers) speakers
    (half rounds up) go to train. All entries of a speaker land on one
    side; the split is invariant to the input entry order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    speakers = sorted({e.speaker_id for e in entries})
    if len(speakers) < 2:
        raise TooFewSpeakers(f"need at least 2 distinct speakers, got {len(speakers)}")

    rng = _Lcg64(seed)
    for i in range(len(speakers) - 1, 0, -1):
        j = rng.below(i + 1)
        speakers[i], speakers[j] = speakers[j], speakers[i]

    n_train = math.floor(train_fraction * len(speakers) + 0.5)
    train_speakers = set(speakers[:n_train])
    train = [e for e in entries if e.speaker_id in train_speakers]
    dev = [e for e in entries if e.speaker_id not in train_speakers]
    return train, dev
