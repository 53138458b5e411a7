"""Pronunciation scoring from CTC logits: forced alignment, temperature
and top-k calibration, verdicts, and evaluation tooling."""

from .align import AlignedToken, AlignmentPath, WordSpan, align_words, forced_align
from .calibrate import (
    CalibrationConfig,
    ScoredTranscript,
    TokenScore,
    Verdict,
    WordScore,
    calibrate_row,
    flagged_tokens,
    score_transcript,
)
from .ctc import CtcLossResult, ctc_loss, enumerate_paths, posterior_matrix, softmax_temperature
from .evaluate import (
    ConfusionCounts,
    EvalUtterance,
    MetricReport,
    MispronunciationLabels,
    ProportionTestResult,
    compute_metrics,
    count_confusions,
    derive_labels,
    evaluate_corpus,
    proportion_ztest,
    sweep_temperature,
)
from .logits import LogitMatrix, read_ctcl, read_ctcl_file, write_ctcl, write_ctcl_file
from .vocab import Vocabulary, default_vocabulary

__version__ = "0.1.0"

__all__ = [
    "AlignedToken",
    "AlignmentPath",
    "CalibrationConfig",
    "ConfusionCounts",
    "CtcLossResult",
    "EvalUtterance",
    "LogitMatrix",
    "MetricReport",
    "MispronunciationLabels",
    "ProportionTestResult",
    "ScoredTranscript",
    "TokenScore",
    "Verdict",
    "Vocabulary",
    "WordScore",
    "WordSpan",
    "align_words",
    "calibrate_row",
    "compute_metrics",
    "count_confusions",
    "ctc_loss",
    "default_vocabulary",
    "derive_labels",
    "enumerate_paths",
    "evaluate_corpus",
    "flagged_tokens",
    "forced_align",
    "posterior_matrix",
    "proportion_ztest",
    "read_ctcl",
    "read_ctcl_file",
    "score_transcript",
    "softmax_temperature",
    "sweep_temperature",
    "write_ctcl",
    "write_ctcl_file",
]
