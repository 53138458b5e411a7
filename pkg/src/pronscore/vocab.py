"""Output vocabulary: ordered symbol set plus the CTC blank."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field

from .errors import ConfigError, UnknownToken

BLANK_SYMBOL = "<pad>"


def normalize_text(text: str) -> str:
    """Canonical form used for all targets: Unicode NFC, lowercased."""
    return unicodedata.normalize("NFC", text).lower()


@dataclass(frozen=True)
class Vocabulary:
    """Ordered list of output symbols (characters incl. space) and the blank index.

    The blank doubles as the padding symbol of the acoustic model; it is the
    only symbol that may never appear in a target.
    """

    labels: tuple[str, ...]
    blank_index: int = 0
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ConfigError("vocabulary labels must be unique")
        if not 0 <= self.blank_index < len(labels):
            raise ConfigError(f"blank_index {self.blank_index} out of range for {len(labels)} labels")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def blank_label(self) -> str:
        return self.labels[self.blank_index]

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownToken(f"symbol {label!r} not in vocabulary") from None

    def encode(self, text: str) -> list[int]:
        """Normalize `text` and map each character to its label index.

        Characters absent from the vocabulary raise UnknownToken; silently
        skipping them would corrupt downstream word indices.
        """
        return [self.index_of(ch) for ch in normalize_text(text)]

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "blank_index": self.blank_index}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(labels=tuple(data["labels"]), blank_index=int(data["blank_index"]))

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)


def default_vocabulary() -> Vocabulary:
    """Blank + space + a-z + the Swedish vowels used by the shipped fixtures."""
    labels = (BLANK_SYMBOL, " ") + tuple("abcdefghijklmnopqrstuvwxyz") + ("å", "ä", "ö")
    return Vocabulary(labels=labels, blank_index=0)
