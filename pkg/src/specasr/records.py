"""Line-delimited JSON record formats shared by the CLI commands."""

import json
from dataclasses import dataclass
from typing import Iterator

from .metrics import SpeculationSet
from .simulate import LabeledExample

EXAMPLE_SCHEMA = "specasr-example.v1"
REPORT_SCHEMA = "specasr-report.v1"


class DataError(Exception):
    """Malformed or inconsistent input data; maps to exit code 2."""


def read_jsonl(path) -> Iterator[tuple[str, dict]]:
    """Yield (location, object) per non-blank line, location as path:lineno."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{where}: expected a JSON object")
            yield where, obj


def write_jsonl(path, objs):
    with open(path, "w", encoding="utf-8") as f:
        for obj in objs:
            f.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    reference: str
    domain: str | None = None
    split: str | None = None


def _optional_str(obj: dict, key: str, where: str) -> str | None:
    value = obj.get(key)
    if value is not None and not isinstance(value, str):
        raise DataError(f"{where}: field {key!r} must be a string when present")
    return value


def utterance_from_obj(obj: dict, where: str) -> UtteranceRecord:
    if not isinstance(obj.get("id"), str) or not obj.get("id"):
        raise DataError(f"{where}: field 'id' must be a non-empty string")
    if not isinstance(obj.get("reference"), str):
        raise DataError(f"{where}: field 'reference' must be a string")
    return UtteranceRecord(
        id=obj["id"],
        reference=obj["reference"],
        domain=_optional_str(obj, "domain", where),
        split=_optional_str(obj, "split", where),
    )


def read_utterances(path) -> list[UtteranceRecord]:
    out, seen = [], set()
    for where, obj in read_jsonl(path):
        rec = utterance_from_obj(obj, where)
        if rec.id in seen:
            raise DataError(f"{where}: duplicate utterance id {rec.id!r}")
        seen.add(rec.id)
        out.append(rec)
    return out


def _token_list(obj: dict, key: str, where: str) -> tuple:
    value = obj.get(key)
    if not isinstance(value, list) or any(not isinstance(t, str) or not t for t in value):
        raise DataError(f"{where}: field {key!r} must be a list of non-empty strings")
    return tuple(value)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DataError(f"{where}: missing field {key!r}")


def example_to_obj(example: LabeledExample, speculations: SpeculationSet | None = None) -> dict:
    obj = {
        "schema": EXAMPLE_SCHEMA,
        "id": example.utterance_id,
        "reference": list(example.full_ref),
        "hyp_prefix": list(example.hyp_prefix),
        "v_star": example.v_star,
        "target_suffix": list(example.target_suffix),
        "nominal_seconds": example.nominal_seconds,
    }
    if example.domain is not None:
        obj["domain"] = example.domain
    if example.split is not None:
        obj["split"] = example.split
    if speculations is not None:
        obj["speculations"] = [
            {"tokens": list(toks), "score": score} for toks, score in speculations.hypotheses
        ]
    return obj


def example_from_obj(obj: dict, where: str) -> tuple[LabeledExample, SpeculationSet | None]:
    if obj.get("schema") != EXAMPLE_SCHEMA:
        raise DataError(f"{where}: expected schema {EXAMPLE_SCHEMA!r}, got {obj.get('schema')!r}")
    if not isinstance(obj.get("id"), str) or not obj.get("id"):
        raise DataError(f"{where}: field 'id' must be a non-empty string")
    v_star = obj.get("v_star")
    if not isinstance(v_star, int):
        raise DataError(f"{where}: field 'v_star' must be an integer")
    for key in ("reference", "hyp_prefix", "target_suffix"):
        _require(obj, key, where)
    try:
        example = LabeledExample(
            utterance_id=obj["id"],
            full_ref=_token_list(obj, "reference", where),
            hyp_prefix=_token_list(obj, "hyp_prefix", where),
            v_star=v_star,
            target_suffix=_token_list(obj, "target_suffix", where),
            nominal_seconds=float(obj.get("nominal_seconds", 1.0)),
            domain=_optional_str(obj, "domain", where),
            split=_optional_str(obj, "split", where),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: {exc}") from exc
    speculations = None
    if "speculations" in obj:
        raw = obj["speculations"]
        if not isinstance(raw, list) or not raw:
            raise DataError(f"{where}: field 'speculations' must be a non-empty list")
        hyps = []
        for h in raw:
            if not isinstance(h, dict) or "tokens" not in h or "score" not in h:
                raise DataError(f"{where}: each speculation needs 'tokens' and 'score'")
            try:
                hyps.append((tuple(h["tokens"]), float(h["score"])))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{where}: bad speculation entry ({exc})") from exc
        try:
            speculations = SpeculationSet(example.utterance_id, tuple(hyps))
        except ValueError as exc:
            raise DataError(f"{where}: {exc}") from exc
    return example, speculations


def read_examples(path) -> list[tuple[LabeledExample, SpeculationSet | None]]:
    return [example_from_obj(obj, where) for where, obj in read_jsonl(path)]
