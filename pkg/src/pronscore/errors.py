"""Exception hierarchy shared across the engine."""


class PronScoreError(Exception):
    """Base class for all domain errors raised by this package."""


class NonFiniteInput(PronScoreError):
    """An input vector or matrix contains NaN or infinity."""


class NonPositiveTemperature(PronScoreError):
    """Softmax temperature must be strictly positive."""


class KZero(PronScoreError):
    """Top-k size must be at least 1."""


class UnknownToken(PronScoreError):
    """A target symbol is not part of the vocabulary."""


class EmptyTarget(PronScoreError):
    """The target sequence is empty after normalization."""


class InfeasibleTarget(PronScoreError):
    """Too few frames to emit the target under CTC transition rules."""


class InstanceTooLarge(PronScoreError):
    """Brute-force path enumeration refused: instance exceeds guard bounds."""


class TokenMismatch(PronScoreError):
    """Alignment tokens disagree with the target text."""


class EmptyText(PronScoreError):
    """Text is empty after normalization."""


class SegmentationMismatch(PronScoreError):
    """Prediction and label segmentations have different lengths."""


class DegenerateReference(PronScoreError):
    """Reference rate of a proportion test must lie strictly in (0, 1)."""


class ZeroSample(PronScoreError):
    """Proportion test needs a positive sample size."""


class InvalidBounds(PronScoreError):
    """Duration filter bounds are inverted."""


class TooFewSpeakers(PronScoreError):
    """Speaker split needs at least two distinct speakers."""


class ContainerFormatError(PronScoreError):
    """A logit container file is malformed or truncated."""


class VocabMismatch(PronScoreError):
    """Logit container labels differ from the expected vocabulary."""


class BackendUnavailable(PronScoreError):
    """The remote acoustic backend is down or timed out."""


class ConfigError(PronScoreError):
    """Invalid service or phrase-file configuration."""
