"""Pluggable suffix speculators: a counting n-gram model with beam k-best
generation, plus empty/random/oracle baselines for bracketing results."""

import json
import math
import random
from dataclasses import dataclass, field

from .metrics import SpeculationSet
from .util import derive_seed

BOS = "<s>"
EOS = "</s>"

MODEL_SCHEMA = "specasr-ngram.v1"


@dataclass(frozen=True)
class SpeculatorConfig:
    """Generation settings: keep k ranked suffixes out of a beam_width-wide
    search, with suffixes capped at max_suffix_len tokens. context_id routes
    scoring through a domain-conditioned count table when the model has one.
    """

    k: int = 8
    beam_width: int | None = None
    max_suffix_len: int = 10
    context_id: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_suffix_len < 1:
            raise ValueError("max_suffix_len must be >= 1")
        if self.beam_width is not None and self.beam_width < self.k:
            raise ValueError("beam_width must be >= k")

    @property
    def effective_beam_width(self) -> int:
        return self.beam_width if self.beam_width is not None else max(16, self.k)


class _CountTable:
    """Raw n-gram counts for one training slice (pooled or one context)."""

    __slots__ = ("counts", "totals", "vocabulary")

    def __init__(self):
        self.counts: dict[tuple, dict[str, int]] = {}
        self.totals: dict[tuple, int] = {}
        self.vocabulary: set[str] = set()

    def add(self, ctx: tuple, token: str, n: int = 1):
        table = self.counts.get(ctx)
        if table is None:
            table = self.counts[ctx] = {}
        table[token] = table.get(token, 0) + n
        self.totals[ctx] = self.totals.get(ctx, 0) + n
        self.vocabulary.add(token)

    def backoff_score(self, ctx: tuple, token: str, factor: float) -> float | None:
        weight = 1.0
        while True:
            table = self.counts.get(ctx)
            if table:
                n = table.get(token, 0)
                if n:
                    return weight * n / self.totals[ctx]
            if not ctx:
                return None
            ctx = ctx[1:]
            weight *= factor


def _rank_key(candidate):
    score, tokens = candidate
    return (-score, tokens)


@dataclass
class NgramModel:
    """Counting language model scored with stupid backoff.

    Scores are unnormalized relative frequencies: the longest context with a
    nonzero count wins and each level of shortening multiplies the score by
    backoff_factor. That is enough to rank continuations; it is not a
    probability distribution. Training with per-sentence context ids keeps
    one extra count table per context. Scoring with an unknown context id
    falls back to the pooled table, and a token a known context has never
    seen at any order falls back to backoff_factor times its pooled unigram
    score, so every counted token keeps a finite positive score.
    """

    order: int
    backoff_factor: float = 0.4
    table: _CountTable = field(default_factory=_CountTable)
    context_tables: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < self.backoff_factor <= 1.0:
            raise ValueError("backoff_factor must be in (0, 1]")

    @property
    def counts(self) -> dict:
        return self.table.counts

    @property
    def vocabulary(self) -> set:
        return self.table.vocabulary

    @property
    def context_ids(self) -> list[str]:
        return sorted(self.context_tables)

    def _context(self, tokens: tuple) -> tuple:
        if self.order == 1:
            return ()
        return tokens[-(self.order - 1):]

    def score(self, token: str, context=(), context_id: str | None = None) -> float:
        """Relative-frequency score of ``token`` after ``context``; strictly
        positive for every token the model has ever counted."""
        if token not in self.table.vocabulary:
            raise KeyError(f"token not in model vocabulary: {token!r}")
        ctx = self._context(tuple(context))
        sub = self.context_tables.get(context_id) if context_id is not None else None
        if sub is not None:
            s = sub.backoff_score(ctx, token, self.backoff_factor)
            if s is not None:
                return s
            return self.backoff_factor * self.table.backoff_score((), token, self.backoff_factor)
        s = self.table.backoff_score(ctx, token, self.backoff_factor)
        assert s is not None  # vocabulary membership guarantees a unigram count
        return s

    def log_score(self, token: str, context=(), context_id: str | None = None) -> float:
        return math.log(self.score(token, context, context_id))

    def _proposals(self) -> list[str]:
        return sorted(t for t in self.table.vocabulary if t != EOS)

    def propose(self, prefix, config: SpeculatorConfig, utterance_id: str = ""):
        """Beam-search candidate suffixes as (tokens, log-score) pairs.

        A hypothesis closes by predicting the end-of-utterance marker (the
        marker's score joins the total, the marker itself is stripped) or by
        reaching max_suffix_len, in which case no end credit applies. The
        empty suffix is always among the candidates, so the model can claim
        the utterance is already complete. Candidate order is score-major
        with a lexicographic token tie-break.
        """
        if not self.table.vocabulary:
            return [((), 0.0)]
        cid = config.context_id
        words = self._proposals()
        base = (BOS,) * (self.order - 1) + tuple(prefix)
        width = config.effective_beam_width
        live = [(0.0, ())]
        done = []
        for _ in range(config.max_suffix_len):
            grown = []
            for score, toks in live:
                ctx = base + toks
                done.append((score + self.log_score(EOS, ctx, cid), toks))
                for w in words:
                    grown.append((score + self.log_score(w, ctx, cid), toks + (w,)))
            grown.sort(key=_rank_key)
            live = grown[:width]
            if not live:
                break
        done.extend(live)
        return [(toks, score) for score, toks in done]


class EmptySpeculator:
    """Never speculates: the single candidate is the empty suffix. Scoring a
    corpus with it deletes every reference suffix word, the no-speculation
    baseline."""

    def propose(self, prefix, config, utterance_id=""):
        return [((), 0.0)]


class RandomSpeculator:
    """Noise floor: k suffixes of uniform vocabulary tokens with lengths
    uniform in 1..max_suffix_len. Reproducible, keyed by (seed, utterance)."""

    def __init__(self, vocabulary, seed: int = 0):
        self.vocabulary = sorted(set(vocabulary) - {BOS, EOS})
        if not self.vocabulary:
            raise ValueError("random speculator needs a non-empty vocabulary")
        self.seed = seed

    def propose(self, prefix, config, utterance_id=""):
        rng = random.Random(derive_seed(self.seed, utterance_id))
        out = []
        for rank in range(config.k):
            length = rng.randint(1, config.max_suffix_len)
            toks = tuple(rng.choice(self.vocabulary) for _ in range(length))
            out.append((toks, -float(rank)))
        return out


class OracleSpeculator:
    """Cheating topline: returns the true reference suffix at rank one. Must
    be constructed with the reference suffixes it will be asked about."""

    def __init__(self, references):
        self.references = {str(uid): tuple(suffix) for uid, suffix in references.items()}

    def propose(self, prefix, config, utterance_id=""):
        if utterance_id not in self.references:
            raise KeyError(f"oracle speculator has no reference suffix for {utterance_id!r}")
        return [(self.references[utterance_id], 0.0)]


def train_ngram(corpus, order: int, context_ids=None, backoff_factor: float = 0.4) -> NgramModel:
    """Count n-grams of every length up to ``order`` over a token-sequence
    corpus.

    Each sentence is padded with start markers and terminated with the
    end-of-utterance marker, so the model can score first words and
    stopping alike. With ``context_ids`` (one per sentence, None entries
    allowed) a per-context table is kept alongside the pooled one.
    """
    model = NgramModel(order=order, backoff_factor=backoff_factor)
    if context_ids is None:
        pairs = ((sent, None) for sent in corpus)
    else:
        pairs = zip(corpus, context_ids, strict=True)
    sentences = 0
    for sent, cid in pairs:
        seq = (BOS,) * (order - 1) + tuple(sent) + (EOS,)
        tables = [model.table]
        if cid is not None:
            sub = model.context_tables.get(cid)
            if sub is None:
                sub = model.context_tables[cid] = _CountTable()
            tables.append(sub)
        for pos in range(order - 1, len(seq)):
            token = seq[pos]
            for clen in range(order):
                ctx = seq[pos - clen:pos]
                for t in tables:
                    t.add(ctx, token)
        sentences += 1
    if sentences == 0:
        raise ValueError("training corpus is empty")
    return model


def build_speculation_set(utterance_id: str, candidates, k: int) -> SpeculationSet:
    """Merge duplicate suffixes keeping the best score, rank by score with a
    lexicographic tie-break, and keep the top k."""
    best: dict[tuple, float] = {}
    for toks, score in candidates:
        t = tuple(toks)
        prev = best.get(t)
        if prev is None or score > prev:
            best[t] = score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    if not ranked:
        ranked = [((), 0.0)]
    return SpeculationSet(utterance_id, tuple(ranked))


def speculate(model, prefix, config: SpeculatorConfig | None = None,
              utterance_id: str = "") -> SpeculationSet:
    """Ask a speculator for up to config.k ranked candidate suffixes."""
    config = config or SpeculatorConfig()
    candidates = model.propose(tuple(prefix), config, utterance_id)
    return build_speculation_set(utterance_id, candidates, config.k)


def make_speculator(kind: str, *, model: NgramModel | None = None, vocabulary=None,
                    seed: int = 0, references=None):
    """Factory for the speculator kinds the CLI understands."""
    kind = kind.lower()
    if kind == "ngram":
        if model is None:
            raise ValueError("ngram speculator needs a trained model")
        return model
    if kind == "empty":
        return EmptySpeculator()
    if kind == "random":
        if vocabulary is None and model is not None:
            vocabulary = model.vocabulary
        if not vocabulary:
            raise ValueError("random speculator needs a vocabulary or a model to take one from")
        return RandomSpeculator(vocabulary, seed)
    if kind == "oracle":
        if references is None:
            raise ValueError("oracle speculator needs reference suffixes")
        return OracleSpeculator(references)
    raise ValueError(f"unknown speculator kind: {kind!r}")


def _table_to_obj(table: _CountTable) -> dict:
    out = {}
    for ctx, toks in sorted(table.counts.items()):
        out[" ".join(ctx)] = dict(sorted(toks.items()))
    return out


def _table_from_obj(obj: dict) -> _CountTable:
    table = _CountTable()
    for ctx_str, toks in obj.items():
        ctx = tuple(ctx_str.split(" ")) if ctx_str else ()
        for token, n in toks.items():
            table.add(ctx, token, int(n))
    return table


def save_model(model: NgramModel, path):
    """Write the count tables as versioned JSON with stable key order."""
    obj = {
        "schema": MODEL_SCHEMA,
        "order": model.order,
        "backoff_factor": model.backoff_factor,
        "counts": _table_to_obj(model.table),
        "context_counts": {cid: _table_to_obj(t) for cid, t in sorted(model.context_tables.items())},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def load_model(path) -> NgramModel:
    with open(path, encoding="utf-8") as f:
        obj = json.load(f)
    if obj.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"{path}: expected a {MODEL_SCHEMA} model file, got schema {obj.get('schema')!r}")
    model = NgramModel(order=int(obj["order"]), backoff_factor=float(obj["backoff_factor"]))
    model.table = _table_from_obj(obj["counts"])
    model.context_tables = {cid: _table_from_obj(t) for cid, t in obj["context_counts"].items()}
    return model
