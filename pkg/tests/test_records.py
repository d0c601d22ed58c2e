import pytest

from specasr.metrics import SpeculationSet
from specasr.records import (
    DataError,
    example_from_obj,
    example_to_obj,
    read_examples,
    read_jsonl,
    read_utterances,
    write_jsonl,
)
from specasr.simulate import label_example


def make_example():
    return label_example("u1", ("a", "x"), ("a", "b", "c"),
                         nominal_seconds=1.5, domain="d", split="test")


def test_example_round_trip(tmp_path):
    ex = make_example()
    sset = SpeculationSet("u1", ((("b", "c"), -0.25), ((), -1.5)))
    path = tmp_path / "ex.jsonl"
    write_jsonl(path, [example_to_obj(ex, sset)])
    [(loaded, loaded_set)] = read_examples(path)
    assert loaded == ex
    assert loaded_set == sset


def test_example_without_speculations_round_trips(tmp_path):
    ex = make_example()
    path = tmp_path / "ex.jsonl"
    write_jsonl(path, [example_to_obj(ex)])
    [(loaded, loaded_set)] = read_examples(path)
    assert loaded == ex
    assert loaded_set is None


def test_schema_mismatch_rejected():
    obj = example_to_obj(make_example())
    obj["schema"] = "other.v9"
    with pytest.raises(DataError):
        example_from_obj(obj, "mem:1")


def test_inconsistent_suffix_rejected():
    obj = example_to_obj(make_example())
    obj["target_suffix"] = ["zzz"]
    with pytest.raises(DataError):
        example_from_obj(obj, "mem:1")


def test_malformed_json_reports_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "reference": "x"}\nnot json\n')
    with pytest.raises(DataError) as err:
        list(read_jsonl(path))
    assert ":2" in str(err.value)


def test_duplicate_utterance_ids_rejected(tmp_path):
    path = tmp_path / "utt.jsonl"
    path.write_text('{"id": "a", "reference": "x"}\n{"id": "a", "reference": "y"}\n')
    with pytest.raises(DataError):
        read_utterances(path)


def test_utterance_field_validation(tmp_path):
    path = tmp_path / "utt.jsonl"
    path.write_text('{"id": "", "reference": "x"}\n')
    with pytest.raises(DataError):
        read_utterances(path)
    path.write_text('{"id": "a", "reference": 7}\n')
    with pytest.raises(DataError):
        read_utterances(path)
