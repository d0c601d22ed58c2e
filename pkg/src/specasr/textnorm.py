"""Transcript normalization: raw strings to alignment-unit token sequences."""

import re
import string
from dataclasses import asdict, dataclass

TokenSeq = tuple[str, ...]

WORD = "word"
CHARACTER = "character"

# one bracket pair with no nested brackets inside; applied to fixpoint so
# stacked tags like "[[x]]" still disappear completely
_TAG_RE = re.compile(r"\[[^\[\]]*\]|<[^<>]*>")


@dataclass(frozen=True)
class NormalizationConfig:
    """How raw transcript text becomes tokens.

    Defaults are all-off: plain whitespace splitting at the word level,
    which keeps tokens like "i'd" intact. ``strip_tags`` removes bracketed
    annotations such as "[laughter]" or "<noise>". ``strip_punctuation``
    trims punctuation from token edges but keeps word-internal characters;
    with character units it drops punctuation characters entirely so that
    normalization stays idempotent.
    """

    lowercase: bool = False
    strip_tags: bool = False
    strip_punctuation: bool = False
    unit: str = WORD

    def __post_init__(self):
        if self.unit not in (WORD, CHARACTER):
            raise ValueError(f"unknown unit {self.unit!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationConfig":
        fields = ("lowercase", "strip_tags", "strip_punctuation", "unit")
        return cls(**{f: data[f] for f in fields if f in data})


def normalize(raw: str, config: NormalizationConfig | None = None) -> TokenSeq:
    """Normalize a transcript string into a token sequence.

    Deterministic; empty or all-whitespace input yields the empty sequence,
    and re-normalizing a rendered result is a no-op.
    """
    config = config or NormalizationConfig()
    text = raw.lower() if config.lowercase else raw
    if config.strip_tags:
        while True:
            stripped = _TAG_RE.sub(" ", text)
            if stripped == text:
                break
            text = stripped
    tokens = text.split()
    if config.strip_punctuation and config.unit == WORD:
        tokens = [t.strip(string.punctuation) for t in tokens]
        tokens = [t for t in tokens if t]
    if config.unit == CHARACTER:
        chars = [ch for tok in tokens for ch in tok]
        if config.strip_punctuation:
            chars = [ch for ch in chars if ch not in string.punctuation]
        return tuple(chars)
    return tuple(tokens)


def render(tokens) -> str:
    """Join tokens back into a plain string with single spaces."""
    return " ".join(tokens)
