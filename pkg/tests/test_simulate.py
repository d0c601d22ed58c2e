import random

import pytest

from specasr.align import awsed_bruteforce
from specasr.simulate import (
    ErrorChannelConfig,
    LabeledExample,
    TruncationPolicy,
    corrupt,
    label_example,
    make_labeled_example,
    truncate,
)

REF = ("i'd", "like", "to", "call", "my", "father")
VOCAB = tuple("pqrstuv")


# ---------------------------------------------------------------------------
# truncation


def test_truncate_two_words():
    assert truncate(REF, TruncationPolicy(mode="words", amount=2)) == \
        ("i'd", "like", "to", "call")


def test_truncate_zero_keeps_everything():
    assert truncate(REF, TruncationPolicy(mode="words", amount=0)) == REF


def test_truncate_clamps_at_empty():
    assert truncate(("a",), TruncationPolicy(mode="words", amount=5)) == ()


def test_truncate_fraction_rounds_up_kept_tokens():
    assert truncate(REF, TruncationPolicy(mode="fraction", amount=0.3)) == REF[:5]
    assert truncate(REF, TruncationPolicy(mode="fraction", amount=1.0)) == ()
    assert truncate(REF, TruncationPolicy(mode="fraction", amount=0.0)) == REF


def test_truncation_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(mode="seconds")
    with pytest.raises(ValueError):
        TruncationPolicy(mode="fraction", amount=1.5)
    with pytest.raises(ValueError):
        TruncationPolicy(amount=-1)


# ---------------------------------------------------------------------------
# error channel


def test_identity_channel():
    cfg = ErrorChannelConfig()
    assert corrupt(REF, cfg) == REF


def test_channel_determinism():
    cfg = ErrorChannelConfig(p_sub=0.2, p_del=0.1, p_ins=0.1,
                             confusion_vocab=VOCAB, seed=99)
    prefix = tuple(f"w{i}" for i in range(200))
    assert corrupt(prefix, cfg) == corrupt(prefix, cfg)


def test_substitution_rate_within_binomial_window():
    prefix = tuple(f"w{i}" for i in range(1000))
    cfg = ErrorChannelConfig(p_sub=0.1, confusion_vocab=VOCAB, seed=42)
    out = corrupt(prefix, cfg)
    assert len(out) == len(prefix)
    substituted = sum(1 for a, b in zip(prefix, out) if a != b)
    assert 70 <= substituted <= 130
    assert all(b in VOCAB for a, b in zip(prefix, out) if a != b)


def test_deletion_rate_within_binomial_window():
    prefix = tuple(f"w{i}" for i in range(1000))
    cfg = ErrorChannelConfig(p_del=0.1, seed=43)
    out = corrupt(prefix, cfg)
    deleted = len(prefix) - len(out)
    assert 70 <= deleted <= 130


def test_insertion_rate_within_binomial_window():
    prefix = tuple(f"w{i}" for i in range(1000))
    cfg = ErrorChannelConfig(p_ins=0.1, confusion_vocab=VOCAB, seed=44)
    out = corrupt(prefix, cfg)
    inserted = len(out) - len(prefix)
    assert 70 <= inserted <= 130


def test_substitution_never_reproduces_original():
    prefix = ("p",) * 500
    cfg = ErrorChannelConfig(p_sub=1.0, confusion_vocab=VOCAB, seed=45)
    out = corrupt(prefix, cfg)
    assert all(tok != "p" for tok in out)


def test_rates_need_confusion_vocab():
    with pytest.raises(ValueError):
        corrupt(REF, ErrorChannelConfig(p_sub=0.5))
    with pytest.raises(ValueError):
        ErrorChannelConfig(p_sub=0.7, p_del=0.5)
    with pytest.raises(ValueError):
        ErrorChannelConfig(p_ins=1.5, confusion_vocab=VOCAB)


# ---------------------------------------------------------------------------
# labeled examples


def test_label_example_worked_case():
    ex = label_example("u1", ("i'd", "line", "to", "call", "ma"), REF)
    assert ex.v_star == 4
    assert ex.target_suffix == ("my", "father")
    assert ex.full_ref == REF


def test_identity_channel_labels_exact_tail():
    policy = TruncationPolicy(mode="words", amount=2)
    ex = make_labeled_example("u1", REF, policy, ErrorChannelConfig())
    assert ex.hyp_prefix == REF[:-2]
    assert ex.v_star == len(REF) - 2
    assert ex.target_suffix == REF[-2:]
    assert ex.nominal_seconds == policy.nominal_seconds


def test_labels_always_match_split_search():
    policy = TruncationPolicy(mode="words", amount=2)
    channel = ErrorChannelConfig(p_sub=0.3, p_del=0.15, p_ins=0.15,
                                 confusion_vocab=tuple("abcde"), seed=7)
    rng = random.Random(401)
    for n in range(150):
        ref = tuple(rng.choice("abcde") for _ in range(rng.randint(1, 10)))
        ex = make_labeled_example(f"utt-{n}", ref, policy, channel)
        check = awsed_bruteforce(ex.hyp_prefix, ref)
        assert ex.target_suffix == check.suffix
        assert ex.v_star == check.v_star
        assert ex.v_star + len(ex.target_suffix) == len(ref)


def test_examples_do_not_depend_on_processing_order():
    policy = TruncationPolicy(mode="words", amount=1)
    channel = ErrorChannelConfig(p_sub=0.5, confusion_vocab=tuple("xyz"), seed=3)
    refs = {f"utt-{i}": ("x", "y", "z", "x") for i in range(10)}
    forward = {uid: make_labeled_example(uid, ref, policy, channel)
               for uid, ref in refs.items()}
    backward = {uid: make_labeled_example(uid, ref, policy, channel)
                for uid, ref in reversed(list(refs.items()))}
    assert forward == backward


def test_empty_reference_rejected():
    with pytest.raises(ValueError):
        make_labeled_example("u", (), TruncationPolicy(), ErrorChannelConfig())


def test_labeled_example_consistency_enforced():
    with pytest.raises(ValueError):
        LabeledExample("u", ("a", "b"), ("a",), 1, ("wrong",))
    with pytest.raises(ValueError):
        LabeledExample("u", ("a", "b"), ("a",), 3, ())
