"""Suffix and whole-utterance oracle metrics, corpus pooling, and blockwise
bootstrap confidence intervals for system comparisons."""

from dataclasses import dataclass

import numpy as np

from . import align
from .align import UNIT_COSTS, WerBreakdown
from .textnorm import TokenSeq


@dataclass(frozen=True)
class SpeculationSet:
    """Ranked candidate suffixes for one utterance, best first.

    ``hypotheses`` holds (tokens, score) pairs with non-increasing scores.
    """

    utterance_id: str
    hypotheses: tuple

    def __post_init__(self):
        hyps = tuple((tuple(toks), float(score)) for toks, score in self.hypotheses)
        if not hyps:
            raise ValueError("speculation set must hold at least one hypothesis")
        for a, b in zip(hyps, hyps[1:]):
            if a[1] < b[1]:
                raise ValueError("hypothesis scores must be non-increasing")
        object.__setattr__(self, "hypotheses", hyps)

    @property
    def k(self) -> int:
        return len(self.hypotheses)

    def suffixes(self) -> list[TokenSeq]:
        return [toks for toks, _ in self.hypotheses]


@dataclass(frozen=True)
class SowerResult:
    """Best-of-k pick for one utterance: which hypothesis won (1-based rank)
    and its error breakdown against the reference suffix."""

    best_index: int
    best: WerBreakdown
    t_seconds: float
    k: int


@dataclass(frozen=True)
class EvalEntry:
    """One utterance ready for scoring: reference suffix plus speculations,
    and optionally the hypothesis prefix and full reference for
    whole-utterance oracle scoring."""

    utterance_id: str
    ref_suffix: TokenSeq
    speculations: SpeculationSet
    hyp_prefix: TokenSeq | None = None
    full_ref: TokenSeq | None = None
    nominal_seconds: float = 1.0


@dataclass
class EvalReport:
    """Corpus-level rollup: per-utterance best picks plus pooled counts and
    percentages. Percentages are None when the pooled denominator is zero
    and edits exist anyway."""

    per_utterance: list
    counts: WerBreakdown
    first_word_counts: WerBreakdown
    oracle_counts: WerBreakdown | None
    corpus_sower: float | None
    first_word_sower: float | None
    corpus_oracle_wer: float | None
    n_utterances: int


def wer(hyp, ref) -> WerBreakdown:
    """Error breakdown of one hypothesis against one reference, unit costs."""
    return align.edit_alignment(hyp, ref, UNIT_COSTS)


def _best_breakdown(candidates, ref) -> tuple[int, WerBreakdown]:
    # fewest edits wins; earlier rank wins ties (same denominator per
    # utterance, so this equals minimizing the rate, and it stays
    # well-defined when the reference is empty and every rate is undefined)
    best_i = 0
    best = wer(candidates[0], ref)
    for i in range(1, len(candidates)):
        bd = wer(candidates[i], ref)
        if bd.total < best.total:
            best_i, best = i, bd
    return best_i, best


def sower(speculations: SpeculationSet, ref_suffix, t_seconds: float = 1.0) -> SowerResult:
    """Best-of-k suffix error pick: the hypothesis with the fewest edits
    against the reference suffix wins, leftmost on ties."""
    idx, best = _best_breakdown(speculations.suffixes(), tuple(ref_suffix))
    return SowerResult(best_index=idx + 1, best=best,
                       t_seconds=t_seconds, k=speculations.k)


def first_word_sower(speculations: SpeculationSet, ref_suffix, t_seconds: float = 1.0) -> SowerResult:
    """sower() after truncating every hypothesis and the reference suffix to
    their first token (empty stays empty)."""
    clipped = SpeculationSet(
        speculations.utterance_id,
        tuple((toks[:1], score) for toks, score in speculations.hypotheses),
    )
    return sower(clipped, tuple(ref_suffix)[:1], t_seconds)


def oracle_full_wer(prefix_hyp, speculations: SpeculationSet, full_ref) -> WerBreakdown:
    """Whole-utterance breakdown using the best speculated completion: the
    prefix hypothesis concatenated with each candidate suffix is scored
    against the full reference and the fewest-edit completion wins,
    leftmost on ties."""
    prefix = tuple(prefix_hyp)
    completions = [prefix + toks for toks in speculations.suffixes()]
    _, best = _best_breakdown(completions, tuple(full_ref))
    return best


def werr(sys_wer: float, baseline_wer: float, topline_wer: float) -> float:
    """Percentage of the baseline-to-topline gap recovered by a system:
    100 * (sys - baseline) / (topline - baseline)."""
    if topline_wer == baseline_wer:
        raise ValueError("topline and baseline coincide; recovery is undefined")
    # + 0.0 normalizes the negative zero that a zero numerator produces
    return 100.0 * (sys_wer - baseline_wer) / (topline_wer - baseline_wer) + 0.0


def pooled_percent(counts: WerBreakdown) -> float | None:
    """Corpus error percentage from pooled counts; 0.0 for an all-empty
    corpus, None when edits exist but no reference words do."""
    if counts.ref_len > 0:
        return 100.0 * counts.total / counts.ref_len
    return 0.0 if counts.total == 0 else None


def evaluate(entries) -> EvalReport:
    """Score a corpus of entries.

    Pooling sums edit counts and reference lengths across utterances before
    dividing; it never averages per-utterance rates. Utterances with empty
    reference suffixes contribute their insertions but no reference words.
    Whole-utterance oracle numbers appear when entries carry a hypothesis
    prefix and full reference.
    """
    entries = list(entries)
    per, fw_per, oracle = [], [], []
    for e in entries:
        per.append(sower(e.speculations, e.ref_suffix, e.nominal_seconds))
        fw_per.append(first_word_sower(e.speculations, e.ref_suffix, e.nominal_seconds))
        if e.hyp_prefix is not None and e.full_ref is not None:
            oracle.append(oracle_full_wer(e.hyp_prefix, e.speculations, e.full_ref))
    counts = sum((r.best for r in per), WerBreakdown())
    fw_counts = sum((r.best for r in fw_per), WerBreakdown())
    oracle_counts = sum(oracle, WerBreakdown()) if oracle else None
    return EvalReport(
        per_utterance=per,
        counts=counts,
        first_word_counts=fw_counts,
        oracle_counts=oracle_counts,
        corpus_sower=pooled_percent(counts),
        first_word_sower=pooled_percent(fw_counts),
        corpus_oracle_wer=pooled_percent(oracle_counts) if oracle_counts is not None else None,
        n_utterances=len(entries),
    )


def make_blocks(per_utterance, block_size: int = 1):
    """Group per-utterance (id, edits, ref_words) triples into bootstrap
    blocks: sort by id, then pool consecutive runs of block_size.

    Returns (block_ids, blocks) where blocks are (edits, ref_words) pairs
    and each block id is the first utterance id in its run.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    rows = sorted(per_utterance)
    ids, blocks = [], []
    for start in range(0, len(rows), block_size):
        chunk = rows[start:start + block_size]
        ids.append(chunk[0][0])
        blocks.append((sum(r[1] for r in chunk), sum(r[2] for r in chunk)))
    return ids, blocks


def _pooled_pct_matrix(arr: np.ndarray, idx: np.ndarray) -> np.ndarray:
    edits = arr[idx, 0].sum(axis=1)
    words = arr[idx, 1].sum(axis=1)
    # a resample with zero reference words scores its edits against a
    # one-word denominator; unreachable in practice but keeps deltas finite
    return 100.0 * edits / np.maximum(words, 1.0)


def bootstrap_delta(blocks_a, blocks_b, resamples: int = 10000, seed: int = 0,
                    block_ids=None) -> tuple[float, float]:
    """Percentile interval for the pooled-percentage difference A minus B.

    The two block lists must be index-aligned over the same blocks, each
    block a (edits, ref_words) pair. Every resample draws blocks with
    replacement (the same indices for both systems), recomputes both pooled
    percentages, and takes the difference; the 2.5th and 97.5th percentiles
    of those differences come back as (lo, hi). Deterministic for a fixed
    seed. When block_ids is given the blocks are first sorted by id, making
    the interval independent of input order.
    """
    a = list(blocks_a)
    b = list(blocks_b)
    if len(a) != len(b):
        raise ValueError("block lists must be index-aligned")
    if not a:
        raise ValueError("no blocks to resample")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    if block_ids is not None:
        if len(block_ids) != len(a):
            raise ValueError("block_ids must align with the blocks")
        order = sorted(range(len(a)), key=lambda i: block_ids[i])
        a = [a[i] for i in order]
        b = [b[i] for i in order]
    arr_a = np.asarray(a, dtype=float)
    arr_b = np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(a), size=(resamples, len(a)))
    deltas = _pooled_pct_matrix(arr_a, idx) - _pooled_pct_matrix(arr_b, idx)
    lo, hi = np.percentile(deltas, [2.5, 97.5])
    return float(lo), float(hi)
