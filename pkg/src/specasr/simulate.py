"""Deterministic stand-in for the recognizer front end: reference truncation
plus a seeded substitution/deletion/insertion error channel, yielding
alignment-labeled examples for training-style label generation and for
evaluating speculators without any audio."""

import math
import random
from dataclasses import asdict, dataclass, replace

from . import align
from .textnorm import TokenSeq
from .util import derive_seed

WORDS = "words"
FRACTION = "fraction"


@dataclass(frozen=True)
class TruncationPolicy:
    """How much of the reference tail to withhold, as a proxy for cutting
    the audio short: a fixed word count or a fraction of the tokens. The
    matching audio duration rides along as metadata for reporting (the
    defaults treat two withheld words as roughly one second)."""

    mode: str = WORDS
    amount: float = 2.0
    nominal_seconds: float = 1.0

    def __post_init__(self):
        if self.mode not in (WORDS, FRACTION):
            raise ValueError(f"unknown truncation mode {self.mode!r}")
        if self.amount < 0:
            raise ValueError("amount must be non-negative")
        if self.mode == FRACTION and self.amount > 1:
            raise ValueError("fractional amount must be at most 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TruncationPolicy":
        fields = ("mode", "amount", "nominal_seconds")
        return cls(**{f: data[f] for f in fields if f in data})


@dataclass(frozen=True)
class ErrorChannelConfig:
    """Per-token corruption rates. Substitution and deletion are mutually
    exclusive per token; insertion fires independently after each position.
    Substitutes come from confusion_vocab minus the original token."""

    p_sub: float = 0.0
    p_del: float = 0.0
    p_ins: float = 0.0
    confusion_vocab: tuple = ()
    seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_del", "p_ins"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.p_sub + self.p_del > 1.0:
            raise ValueError("p_sub + p_del must not exceed 1")
        object.__setattr__(self, "confusion_vocab", tuple(sorted(set(self.confusion_vocab))))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["confusion_vocab"] = list(self.confusion_vocab)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ErrorChannelConfig":
        fields = ("p_sub", "p_del", "p_ins", "confusion_vocab", "seed")
        return cls(**{f: data[f] for f in fields if f in data})


@dataclass(frozen=True)
class LabeledExample:
    """A reference utterance paired with its (possibly errorful) hypothesis
    prefix and the aligned target suffix a speculator should produce. The
    target is definitionally the suffix the split search returns."""

    utterance_id: str
    full_ref: TokenSeq
    hyp_prefix: TokenSeq
    v_star: int
    target_suffix: TokenSeq
    nominal_seconds: float = 1.0
    domain: str | None = None
    split: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "full_ref", tuple(self.full_ref))
        object.__setattr__(self, "hyp_prefix", tuple(self.hyp_prefix))
        object.__setattr__(self, "target_suffix", tuple(self.target_suffix))
        if not 0 <= self.v_star <= len(self.full_ref):
            raise ValueError("v_star out of range")
        if self.target_suffix != self.full_ref[self.v_star:]:
            raise ValueError("target_suffix must equal full_ref[v_star:]")


def truncate(ref, policy: TruncationPolicy | None = None) -> TokenSeq:
    """Left prefix of the reference after withholding the configured tail;
    never shorter than empty."""
    policy = policy or TruncationPolicy()
    ref = tuple(ref)
    u = len(ref)
    if policy.mode == WORDS:
        keep = max(0, math.floor(u - policy.amount))
    else:
        keep = min(u, max(0, math.ceil(u * (1.0 - policy.amount))))
    return ref[:keep]


def corrupt(prefix, config: ErrorChannelConfig) -> TokenSeq:
    """Push a token sequence through the error channel. Deterministic for a
    fixed config; the seed lives in the config."""
    if (config.p_sub > 0 or config.p_ins > 0) and not config.confusion_vocab:
        raise ValueError("substitution/insertion rates need a confusion vocabulary")
    rng = random.Random(config.seed)
    vocab = config.confusion_vocab
    out = []
    for token in prefix:
        roll = rng.random()
        if roll < config.p_sub:
            options = [t for t in vocab if t != token]
            out.append(options[rng.randrange(len(options))] if options else token)
        elif roll < config.p_sub + config.p_del:
            pass
        else:
            out.append(token)
        if rng.random() < config.p_ins:
            out.append(vocab[rng.randrange(len(vocab))])
    return tuple(out)


def label_example(utterance_id: str, hyp_prefix, ref, nominal_seconds: float = 1.0,
                  domain: str | None = None, split: str | None = None) -> LabeledExample:
    """Build a labeled example from an externally supplied hypothesis prefix
    by running the split search against the full reference."""
    result = align.awsed(tuple(hyp_prefix), tuple(ref))
    return LabeledExample(
        utterance_id=utterance_id,
        full_ref=tuple(ref),
        hyp_prefix=tuple(hyp_prefix),
        v_star=result.v_star,
        target_suffix=result.suffix,
        nominal_seconds=nominal_seconds,
        domain=domain,
        split=split,
    )


def make_labeled_example(utterance_id: str, ref, policy: TruncationPolicy,
                         channel: ErrorChannelConfig, domain: str | None = None,
                         split: str | None = None) -> LabeledExample:
    """truncate + corrupt + align for one utterance.

    Each utterance corrupts under its own generator substream derived from
    (channel.seed, utterance_id), so outputs do not depend on processing
    order.
    """
    ref = tuple(ref)
    if not ref:
        raise ValueError("reference must be non-empty")
    prefix = truncate(ref, policy)
    utt_channel = replace(channel, seed=derive_seed(channel.seed, utterance_id))
    hyp = corrupt(prefix, utt_channel)
    return label_example(utterance_id, hyp, ref, policy.nominal_seconds, domain, split)
