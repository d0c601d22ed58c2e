"""Acceptance suite: one test per criterion, exact tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v`` for one line per criterion.
"""

import itertools
import json
import math
import random
import time

import pytest

import corpusgen
from specasr import cli, records
from specasr.align import awsed, awsed_bruteforce, edit_alignment
from specasr.metrics import (
    EvalEntry,
    SpeculationSet,
    bootstrap_delta,
    evaluate,
    sower,
    wer,
    werr,
)
from specasr.simulate import ErrorChannelConfig, TruncationPolicy, make_labeled_example
from specasr.speculate import (
    BOS,
    EOS,
    EmptySpeculator,
    OracleSpeculator,
    SpeculatorConfig,
    speculate,
    train_ngram,
)

HYP = ("i'd", "line", "to", "call", "ma")
REF = ("i'd", "like", "to", "call", "my", "father")


def identity_examples():
    policy = TruncationPolicy(mode="words", amount=2)
    channel = ErrorChannelConfig()
    return [make_labeled_example(uid, ref, policy, channel, domain)
            for uid, domain, ref in corpusgen.test_utterances()]


def corpus_sower_for(speculator, examples, config=None, by_domain=False):
    config = config or SpeculatorConfig(k=8, max_suffix_len=4)
    entries = []
    for ex in examples:
        per_cfg = config
        if by_domain:
            per_cfg = SpeculatorConfig(k=config.k, beam_width=config.beam_width,
                                       max_suffix_len=config.max_suffix_len,
                                       context_id=ex.domain)
        sset = speculate(speculator, ex.hyp_prefix, per_cfg, ex.utterance_id)
        entries.append(EvalEntry(ex.utterance_id, ex.target_suffix, sset,
                                 ex.hyp_prefix, ex.full_ref, ex.nominal_seconds))
    return evaluate(entries)


def test_criterion_01_worked_example_exact():
    result = awsed(HYP, REF)
    assert result.v_star == 4
    assert result.suffix == ("my", "father")
    assert result.distance == 2
    leftmost = HYP + result.suffix
    rightmost = HYP + REF[5:]
    assert edit_alignment(leftmost, REF).total == 2
    assert edit_alignment(rightmost, REF).total == 2
    print("CRITERION 1 PASS: worked example splits at v*=4 with suffix "
          "'my father' at distance 2; both completions cost 2 edits")


def test_criterion_02_split_search_equals_bruteforce_oracle():
    rng = random.Random(20_000)
    alphabet = "abcde"
    started = time.monotonic()
    for _ in range(10_000):
        hyp = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        ref = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        fast = awsed(hyp, ref)
        slow = awsed_bruteforce(hyp, ref)
        assert fast.v_star == slow.v_star
        assert fast.suffix == slow.suffix
        assert fast.distance == slow.distance
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    print(f"CRITERION 2 PASS: 10,000 random pairs, one-pass split search equals "
          f"the per-split oracle exactly in {elapsed:.2f}s")


def test_criterion_03_werr_arithmetic():
    assert werr(9.8, 13.6, 3.5) == pytest.approx(37.6, abs=0.1)
    assert werr(11.4, 13.6, 3.5) == pytest.approx(21.8, abs=0.1)
    print("CRITERION 3 PASS: werr(9.8, 13.6, 3.5) = 37.6 and "
          "werr(11.4, 13.6, 3.5) = 21.8 at +/-0.1")


def test_criterion_04_sower_properties():
    rng = random.Random(40_000)
    alphabet = "abcd"
    for _ in range(1_000):
        ref = tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 5)))
        k = rng.randint(1, 8)
        suffixes = [tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 5)))
                    for _ in range(k)]
        sset = SpeculationSet("u", tuple((s, -float(i)) for i, s in enumerate(suffixes)))
        # non-increasing in k
        previous = None
        for j in range(1, k + 1):
            total = sower(SpeculationSet("u", sset.hypotheses[:j]), ref).best.total
            if previous is not None:
                assert total <= previous
            previous = total
        # a true suffix anywhere forces a perfect pick
        position = rng.randint(0, k)
        spiked = suffixes[:position] + [ref] + suffixes[position:]
        spiked_set = SpeculationSet(
            "u", tuple((s, -float(i)) for i, s in enumerate(spiked)))
        assert sower(spiked_set, ref).best.rate == 0

    examples = identity_examples()
    oracle = OracleSpeculator({ex.utterance_id: ex.target_suffix for ex in examples})
    assert corpus_sower_for(oracle, examples).corpus_sower == 0.0
    assert corpus_sower_for(EmptySpeculator(), examples).corpus_sower == 100.0
    print("CRITERION 4 PASS: 1,000 random sets non-increasing in k, true suffix "
          "forces rate 0; oracle corpus SOWER 0.0 and empty 100.0 exactly")


def test_criterion_05_wer_core():
    both = edit_alignment(("i'd", "line", "to", "call", "ma", "my", "father"), REF)
    assert (both.substitutions, both.deletions, both.insertions) == (1, 0, 1)
    shorter = edit_alignment(("i'd", "line", "to", "call", "ma", "father"), REF)
    assert (shorter.substitutions, shorter.deletions, shorter.insertions) == (2, 0, 0)
    rng = random.Random(50_000)
    for _ in range(1_000):
        x = tuple(rng.choice("abcdef") for _ in range(rng.randint(0, 12)))
        assert wer(x, x).rate == 0
    print("CRITERION 5 PASS: completion analyses give S=1,I=1 and S=2,D=0,I=0; "
          "WER(x, x) = 0 on 1,000 random sequences")


def test_criterion_06_bootstrap_correctness(monkeypatch):
    blocks = [(3, 10), (1, 8), (4, 12), (0, 9)]
    assert bootstrap_delta(blocks, blocks, resamples=2_000, seed=11) == (0.0, 0.0)

    blocks_a = [(5, 10), (2, 10)]
    blocks_b = [(3, 10), (2, 10)]
    exact = []
    for draw in itertools.product(range(2), repeat=2):
        ea = sum(blocks_a[i][0] for i in draw)
        wa = sum(blocks_a[i][1] for i in draw)
        eb = sum(blocks_b[i][0] for i in draw)
        wb = sum(blocks_b[i][1] for i in draw)
        exact.append(100.0 * ea / wa - 100.0 * eb / wb)
    exact.sort()
    expect_lo = exact[max(math.ceil(0.025 * len(exact)) - 1, 0)]
    expect_hi = exact[max(math.ceil(0.975 * len(exact)) - 1, 0)]
    lo, hi = bootstrap_delta(blocks_a, blocks_b, resamples=10_000, seed=6)
    assert abs(lo - expect_lo) < 1e-9
    assert abs(hi - expect_hi) < 1e-9

    rng = random.Random(60_000)
    big_a = [(rng.randint(0, 5), rng.randint(4, 12)) for _ in range(25)]
    big_b = [(rng.randint(0, 5), rng.randint(4, 12)) for _ in range(25)]
    runs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("SPECASR_THREADS", threads)
        runs.append(bootstrap_delta(big_a, big_b, resamples=10_000, seed=123))
    assert runs[0] == runs[1] == runs[2]
    print("CRITERION 6 PASS: self-delta exactly (0, 0); two-block percentiles match "
          "exhaustive enumeration within 1e-9; intervals bit-identical across "
          "runs and thread counts")


def test_criterion_07_beam_matches_exhaustive_enumeration():
    rng = random.Random(70_000)
    alphabet = ["a", "b", "c", "d", "e"]  # plus the end marker: 6 symbols
    corpus = [tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
              for _ in range(40)]
    model = train_ngram(corpus, order=2)
    max_len = 4

    words = sorted(model.vocabulary - {EOS})
    base = (BOS,) * (model.order - 1) + ("a",)
    expected = []
    for length in range(max_len + 1):
        for combo in itertools.product(words, repeat=length):
            score, ctx = 0.0, base
            for w in combo:
                score += math.log(model.score(w, ctx))
                ctx = ctx + (w,)
            if length < max_len:
                score += math.log(model.score(EOS, ctx))
            expected.append((combo, score))
    expected.sort(key=lambda pair: (-pair[1], pair[0]))

    width = max(len(expected), len(words) ** max_len)
    config = SpeculatorConfig(k=len(expected), beam_width=width, max_suffix_len=max_len)
    produced = list(speculate(model, ("a",), config).hypotheses)
    assert produced == expected
    print(f"CRITERION 7 PASS: exhaustive-width beam reproduces the brute-force "
          f"ranking of all {len(expected)} candidate suffixes exactly")


def test_criterion_08_directional_findings():
    started = time.monotonic()
    examples = identity_examples()
    sentences, context_ids = corpusgen.training_corpus()
    model = train_ngram(sentences, order=3, context_ids=context_ids)

    empty_sower = corpus_sower_for(EmptySpeculator(), examples).corpus_sower
    pooled = corpus_sower_for(model, examples)
    conditioned = corpus_sower_for(model, examples, by_domain=True)

    assert empty_sower == 100.0
    assert pooled.corpus_sower < empty_sower                       # (a)
    assert conditioned.corpus_sower <= pooled.corpus_sower         # (b)
    assert pooled.first_word_sower < pooled.corpus_sower           # (c)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    print(f"CRITERION 8 PASS: ngram {pooled.corpus_sower:.1f} < empty 100.0; "
          f"domain-conditioned {conditioned.corpus_sower:.1f} <= pooled "
          f"{pooled.corpus_sower:.1f}; first-word {pooled.first_word_sower:.1f} "
          f"< full suffix {pooled.corpus_sower:.1f} ({elapsed:.1f}s)")


def test_criterion_09_end_to_end_determinism(tmp_path):
    corpus_objs = [{"id": uid, "reference": " ".join(ref), "domain": domain}
                   for uid, domain, ref in corpusgen.test_utterances()]
    run_config = {
        "truncation": {"mode": "words", "amount": 2, "nominal_seconds": 1.0},
        "channel": {"p_sub": 0.15, "p_del": 0.05, "p_ins": 0.05, "seed": 17},
        "speculator": {"kind": "ngram", "k": 8, "max_suffix_len": 4,
                       "condition_on_domain": True},
        "bootstrap": {"resamples": 2000, "block_size": 1, "seed": 0},
    }
    corpus_path = tmp_path / "corpus.jsonl"
    records.write_jsonl(corpus_path, corpus_objs)
    config_path = tmp_path / "run.json"
    config_path.write_text(json.dumps(run_config))
    lm_path = tmp_path / "sentences.txt"
    sentences, context_ids = corpusgen.training_corpus()
    lm_path.write_text("".join(f"{cid}\t{' '.join(sent)}\n"
                               for sent, cid in zip(sentences, context_ids)))

    def one_run(name):
        out = tmp_path / name
        out.mkdir()
        examples = out / "examples.jsonl"
        model = out / "model.json"
        specs = out / "specs.jsonl"
        report = out / "report.json"
        for argv in (
            ["simulate", "--corpus", corpus_path, "--run-config", config_path,
             "-o", examples],
            ["train-lm", "--corpus", lm_path, "--run-config", config_path,
             "--order", 3, "-o", model],
            ["speculate", "--examples", examples, "--model", model,
             "--run-config", config_path, "-o", specs],
            ["evaluate", "--system", specs, "--baseline", specs,
             "--run-config", config_path, "--report", report],
        ):
            assert cli.main([str(a) for a in argv]) == 0
        return [p.read_bytes() for p in (examples, model, specs, report)]

    assert one_run("first") == one_run("second")
    print("CRITERION 9 PASS: simulate -> speculate -> evaluate pipeline run twice "
          "from one run config produced byte-identical outputs")
