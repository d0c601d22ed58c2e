"""specasr: desk-scale toolkit for speculative speech recognition research.

Aligns errorful hypothesis prefixes against full references to label the
suffix still to be spoken, generates candidate suffixes with pluggable
speculators, and scores systems with suffix-oracle and whole-utterance
oracle error rates plus bootstrap confidence intervals.
"""

from .align import (
    UNIT_COSTS,
    AwsedResult,
    EditCosts,
    WerBreakdown,
    awsed,
    awsed_bruteforce,
    dp_last_row,
    edit_alignment,
    levenshtein,
)
from .metrics import (
    EvalEntry,
    EvalReport,
    SowerResult,
    SpeculationSet,
    bootstrap_delta,
    evaluate,
    first_word_sower,
    make_blocks,
    oracle_full_wer,
    pooled_percent,
    sower,
    wer,
    werr,
)
from .simulate import (
    ErrorChannelConfig,
    LabeledExample,
    TruncationPolicy,
    corrupt,
    label_example,
    make_labeled_example,
    truncate,
)
from .speculate import (
    BOS,
    EOS,
    EmptySpeculator,
    NgramModel,
    OracleSpeculator,
    RandomSpeculator,
    SpeculatorConfig,
    build_speculation_set,
    load_model,
    make_speculator,
    save_model,
    speculate,
    train_ngram,
)
from .textnorm import NormalizationConfig, TokenSeq, normalize, render

__version__ = "0.1.0"

__all__ = [
    "AwsedResult",
    "BOS",
    "EOS",
    "EditCosts",
    "EmptySpeculator",
    "ErrorChannelConfig",
    "EvalEntry",
    "EvalReport",
    "LabeledExample",
    "NgramModel",
    "NormalizationConfig",
    "OracleSpeculator",
    "RandomSpeculator",
    "SowerResult",
    "SpeculationSet",
    "SpeculatorConfig",
    "TokenSeq",
    "TruncationPolicy",
    "UNIT_COSTS",
    "WerBreakdown",
    "awsed",
    "awsed_bruteforce",
    "bootstrap_delta",
    "build_speculation_set",
    "corrupt",
    "dp_last_row",
    "edit_alignment",
    "evaluate",
    "first_word_sower",
    "label_example",
    "levenshtein",
    "load_model",
    "make_blocks",
    "make_labeled_example",
    "make_speculator",
    "normalize",
    "oracle_full_wer",
    "pooled_percent",
    "render",
    "save_model",
    "sower",
    "speculate",
    "train_ngram",
    "truncate",
    "wer",
    "werr",
]
