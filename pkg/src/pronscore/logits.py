"""Logit matrices and the CTCL container file format.

CTCL layout, bit-exact:
  bytes 0-3   magic b"CTCL"
  byte  4     version (1)
  bytes 5-8   little-endian u32 header length
  header      UTF-8 JSON {"frames": int, "labels": [str...], "blank_index": int}
  payload     frames x len(labels) little-endian IEEE-754 float32, row-major
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .errors import ContainerFormatError, NonFiniteInput
from .vocab import Vocabulary

MAGIC = b"CTCL"
VERSION = 1


@dataclass(frozen=True)
class LogitMatrix:
    """Frames x vocabulary matrix of raw (unnormalized) acoustic-model outputs."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ContainerFormatError(f"logits must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteInput("logit matrix contains NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.values.shape[1]


def write_ctcl(fh: BinaryIO, logits: LogitMatrix, vocab: Vocabulary) -> None:
    if logits.vocab_size != len(vocab):
        raise ContainerFormatError(
            f"logit columns ({logits.vocab_size}) != vocabulary size ({len(vocab)})"
        )
    header = json.dumps(
        {"frames": logits.frames, "labels": list(vocab.labels), "blank_index": vocab.blank_index},
        ensure_ascii=False,
        separators=(",", ":"),
    ).encode("utf-8")
    fh.write(MAGIC)
    fh.write(bytes([VERSION]))
    fh.write(struct.pack("<I", len(header)))
    fh.write(header)
    fh.write(np.ascontiguousarray(logits.values, dtype="<f4").tobytes())


def write_ctcl_file(path: str, logits: LogitMatrix, vocab: Vocabulary) -> None:
    with open(path, "wb") as fh:
        write_ctcl(fh, logits, vocab)


def read_ctcl(data: bytes) -> tuple[LogitMatrix, Vocabulary]:
    if len(data) < 9:
        raise ContainerFormatError("container shorter than fixed preamble")
    if data[:4] != MAGIC:
        raise ContainerFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if data[4] != VERSION:
        raise ContainerFormatError(f"unsupported container version {data[4]}")
    (header_len,) = struct.unpack("<I", data[5:9])
    if len(data) < 9 + header_len:
        raise ContainerFormatError("truncated header")
    try:
        header = json.loads(data[9 : 9 + header_len].decode("utf-8"))
        frames = int(header["frames"])
        labels = tuple(header["labels"])
        blank_index = int(header["blank_index"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ContainerFormatError(f"malformed header: {exc}") from exc
    vocab = Vocabulary(labels=labels, blank_index=blank_index)
    payload = data[9 + header_len :]
    expected = frames * len(labels) * 4
    if len(payload) != expected:
        raise ContainerFormatError(f"payload is {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<f4").reshape(frames, len(labels))
    return LogitMatrix(values=values.astype(np.float64)), vocab


def read_ctcl_file(path: str) -> tuple[LogitMatrix, Vocabulary]:
    with open(path, "rb") as fh:
        return read_ctcl(fh.read())
