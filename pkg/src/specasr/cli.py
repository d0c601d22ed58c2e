"""Command-line pipeline over line-delimited JSON corpora: label generation
(align, simulate), model training, speculation, and evaluation with
bootstrap confidence intervals.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field, replace

from . import align, metrics, records, simulate, textnorm
from .metrics import EvalEntry
from .records import REPORT_SCHEMA, DataError
from .simulate import ErrorChannelConfig, TruncationPolicy
from .speculate import (
    SpeculatorConfig,
    load_model,
    make_speculator,
    save_model,
    train_ngram,
)
from .speculate import speculate as run_speculator
from .textnorm import NormalizationConfig
from .util import ordered_map

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

SPECULATOR_KINDS = ("ngram", "empty", "random", "oracle")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on besides its input files. A run
    re-executed from the same config and inputs reproduces its outputs
    byte for byte."""

    normalization: NormalizationConfig = NormalizationConfig()
    truncation: TruncationPolicy = TruncationPolicy()
    channel: ErrorChannelConfig = ErrorChannelConfig()
    speculator_kind: str = "ngram"
    speculator: SpeculatorConfig = SpeculatorConfig()
    condition_on_domain: bool = False
    speculator_seed: int = 0
    lm_order: int = 3
    lm_backoff: float = 0.4
    bootstrap_resamples: int = 10000
    bootstrap_block_size: int = 1
    bootstrap_seed: int = 0
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "normalization": self.normalization.to_dict(),
            "truncation": self.truncation.to_dict(),
            "channel": self.channel.to_dict(),
            "speculator": {
                "kind": self.speculator_kind,
                "k": self.speculator.k,
                "beam_width": self.speculator.beam_width,
                "max_suffix_len": self.speculator.max_suffix_len,
                "condition_on_domain": self.condition_on_domain,
                "seed": self.speculator_seed,
            },
            "lm": {"order": self.lm_order, "backoff_factor": self.lm_backoff},
            "bootstrap": {
                "resamples": self.bootstrap_resamples,
                "block_size": self.bootstrap_block_size,
                "seed": self.bootstrap_seed,
            },
            "outputs": dict(sorted(self.outputs.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        spec = data.get("speculator", {})
        boot = data.get("bootstrap", {})
        lm = data.get("lm", {})
        kind = spec.get("kind", "ngram")
        if kind not in SPECULATOR_KINDS:
            raise ValueError(f"unknown speculator kind {kind!r}")
        return cls(
            normalization=NormalizationConfig.from_dict(data.get("normalization", {})),
            truncation=TruncationPolicy.from_dict(data.get("truncation", {})),
            channel=ErrorChannelConfig.from_dict(data.get("channel", {})),
            speculator_kind=kind,
            speculator=SpeculatorConfig(
                k=int(spec.get("k", 8)),
                beam_width=spec.get("beam_width"),
                max_suffix_len=int(spec.get("max_suffix_len", 10)),
            ),
            condition_on_domain=bool(spec.get("condition_on_domain", False)),
            speculator_seed=int(spec.get("seed", 0)),
            lm_order=int(lm.get("order", 3)),
            lm_backoff=float(lm.get("backoff_factor", 0.4)),
            bootstrap_resamples=int(boot.get("resamples", 10000)),
            bootstrap_block_size=int(boot.get("block_size", 1)),
            bootstrap_seed=int(boot.get("seed", 0)),
            outputs=dict(data.get("outputs", {})),
        )

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def load_run_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise DataError(f"{path}: run config must be a JSON object")
    try:
        return RunConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _warn(message: str):
    print(f"warning: {message}", file=sys.stderr)


def _resolve_out(arg_value, cfg: RunConfig, key: str) -> str:
    out = arg_value or cfg.outputs.get(key)
    if not out:
        raise DataError(f"no output path: pass -o/--out or set outputs.{key} in the run config")
    return out


# ---------------------------------------------------------------------------
# align


def cmd_align(args) -> int:
    cfg = load_run_config(args.run_config)
    norm = cfg.normalization
    refs = {rec.id: rec for rec in records.read_utterances(args.refs)}
    rows = list(records.read_jsonl(args.hyps))

    work = []
    errors = []
    skipped = 0
    for where, obj in rows:
        if not isinstance(obj.get("id"), str) or not obj.get("id"):
            errors.append(f"{where}: field 'id' must be a non-empty string")
            continue
        if not isinstance(obj.get("hyp_prefix"), str):
            errors.append(f"{where}: field 'hyp_prefix' must be a string")
            continue
        uid = obj["id"]
        rec = refs.get(uid)
        if rec is None:
            errors.append(f"{where}: no reference with id {uid!r}")
            continue
        ref_toks = textnorm.normalize(rec.reference, norm)
        if not ref_toks:
            _warn(f"{where}: reference for {uid!r} normalizes to empty, skipping")
            skipped += 1
            continue
        hyp_toks = textnorm.normalize(obj["hyp_prefix"], norm)
        work.append((uid, hyp_toks, ref_toks, rec))
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA

    def one(item):
        uid, hyp_toks, ref_toks, rec = item
        if args.verify:
            got = align.awsed(hyp_toks, ref_toks)
            check = align.awsed_bruteforce(hyp_toks, ref_toks)
            if got != check:
                raise DataError(f"verification failed for {uid!r}: "
                                f"one-pass {got} vs per-split {check}")
        return simulate.label_example(uid, hyp_toks, ref_toks,
                                      cfg.truncation.nominal_seconds, rec.domain, rec.split)

    examples = ordered_map(one, work)
    out_path = _resolve_out(args.out, cfg, "examples")
    records.write_jsonl(out_path, (records.example_to_obj(ex) for ex in examples))
    if examples:
        ratio = sum(ex.v_star / len(ex.full_ref) for ex in examples) / len(examples)
        print(f"aligned {len(examples)} pairs ({skipped} skipped); mean v*/U = {ratio:.3f}")
    else:
        print(f"aligned 0 pairs ({skipped} skipped)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.run_config)
    norm = cfg.normalization
    utts = records.read_utterances(args.corpus)

    work = []
    skipped = 0
    vocab = set()
    for rec in utts:
        toks = textnorm.normalize(rec.reference, norm)
        if not toks:
            _warn(f"reference for {rec.id!r} normalizes to empty, skipping")
            skipped += 1
            continue
        vocab.update(toks)
        work.append((rec, toks))

    channel = cfg.channel
    needs_vocab = channel.p_sub > 0 or channel.p_ins > 0
    if needs_vocab and not channel.confusion_vocab:
        channel = replace(channel, confusion_vocab=tuple(sorted(vocab)))

    def one(item):
        rec, toks = item
        return simulate.make_labeled_example(rec.id, toks, cfg.truncation, channel,
                                             rec.domain, rec.split)

    examples = ordered_map(one, work)
    out_path = _resolve_out(args.out, cfg, "examples")
    records.write_jsonl(out_path, (records.example_to_obj(ex) for ex in examples))
    print(f"simulated {len(examples)} examples ({skipped} skipped)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train-lm


def _read_training_corpus(path, norm):
    sentences, context_ids = [], []
    tagged = False
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" in line:
                tag, text = line.split("\t", 1)
                tag = tag.strip() or None
                tagged = tagged or tag is not None
            else:
                tag, text = None, line
            toks = textnorm.normalize(text, norm)
            if not toks:
                continue
            sentences.append(toks)
            context_ids.append(tag)
    return sentences, (context_ids if tagged else None)


def cmd_train_lm(args) -> int:
    cfg = load_run_config(args.run_config)
    order = args.order if args.order is not None else cfg.lm_order
    backoff = args.backoff if args.backoff is not None else cfg.lm_backoff
    sentences, context_ids = _read_training_corpus(args.corpus, cfg.normalization)
    if not sentences:
        raise DataError(f"{args.corpus}: no usable training sentences")
    try:
        model = train_ngram(sentences, order, context_ids, backoff)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    out_path = _resolve_out(args.out, cfg, "model")
    save_model(model, out_path)
    ctx = f", {len(model.context_tables)} contexts" if model.context_tables else ""
    print(f"trained order-{order} model on {len(sentences)} sentences "
          f"({len(model.vocabulary)} token types{ctx})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# speculate


def cmd_speculate(args) -> int:
    cfg = load_run_config(args.run_config)
    kind = args.kind or cfg.speculator_kind
    if kind not in SPECULATOR_KINDS:
        raise DataError(f"unknown speculator kind {kind!r}")
    spec_cfg = SpeculatorConfig(
        k=args.k if args.k is not None else cfg.speculator.k,
        beam_width=args.beam_width if args.beam_width is not None else cfg.speculator.beam_width,
        max_suffix_len=(args.max_suffix_len if args.max_suffix_len is not None
                        else cfg.speculator.max_suffix_len),
    )
    condition = args.condition_on_domain or cfg.condition_on_domain
    seed = args.seed if args.seed is not None else cfg.speculator_seed

    examples = [ex for ex, _ in records.read_examples(args.examples)]
    if not examples:
        raise DataError(f"{args.examples}: no example records")

    model = None
    if kind in ("ngram", "random"):
        if not args.model:
            raise DataError(f"speculator kind {kind!r} needs --model")
        try:
            model = load_model(args.model)
        except ValueError as exc:
            raise DataError(str(exc)) from exc
    references = {ex.utterance_id: ex.target_suffix for ex in examples}
    try:
        speculator = make_speculator(kind, model=model, seed=seed,
                                     references=references)
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    def one(ex):
        per_cfg = spec_cfg
        if condition and ex.domain is not None:
            per_cfg = replace(spec_cfg, context_id=ex.domain)
        sset = run_speculator(speculator, ex.hyp_prefix, per_cfg, ex.utterance_id)
        return records.example_to_obj(ex, sset)

    out_objs = ordered_map(one, examples)
    out_path = _resolve_out(args.out, cfg, "speculations")
    records.write_jsonl(out_path, out_objs)
    print(f"speculated {len(out_objs)} examples with {kind} speculator (k={spec_cfg.k})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate


def _load_system(path):
    pairs = records.read_examples(path)
    if not pairs:
        raise DataError(f"{path}: no example records")
    examples, entries = [], []
    for ex, sset in pairs:
        if sset is None:
            raise DataError(f"{path}: record {ex.utterance_id!r} carries no speculations "
                            f"(run the speculate command first)")
        examples.append(ex)
        entries.append(EvalEntry(
            utterance_id=ex.utterance_id,
            ref_suffix=ex.target_suffix,
            speculations=sset,
            hyp_prefix=ex.hyp_prefix,
            full_ref=ex.full_ref,
            nominal_seconds=ex.nominal_seconds,
        ))
    return examples, entries


def _round1(x):
    return None if x is None else round(x, 1)


def _section(report: metrics.EvalReport) -> dict:
    return {
        "utterances": report.n_utterances,
        "sower": _round1(report.corpus_sower),
        "first_word_sower": _round1(report.first_word_sower),
        "oracle_wer": _round1(report.corpus_oracle_wer),
        "counts": report.counts.to_dict(),
        "first_word_counts": report.first_word_counts.to_dict(),
        "oracle_counts": (report.oracle_counts.to_dict()
                          if report.oracle_counts is not None else None),
    }


def _group_reports(examples, entries, key) -> dict:
    groups: dict = {}
    for ex, entry in zip(examples, entries):
        label = getattr(ex, key)
        if label is not None:
            groups.setdefault(label, []).append(entry)
    return {label: metrics.evaluate(group) for label, group in sorted(groups.items())}


def _tavg(split_reports: dict) -> dict | None:
    if not split_reports:
        return None

    def mean(values):
        values = [v for v in values if v is not None]
        return round(sum(values) / len(values), 1) if values else None

    return {
        "sower": mean([r.corpus_sower for r in split_reports.values()]),
        "first_word_sower": mean([r.first_word_sower for r in split_reports.values()]),
        "oracle_wer": mean([r.corpus_oracle_wer for r in split_reports.values()]),
    }


def _sower_blocks(examples, report, block_size):
    rows = [(ex.utterance_id, res.best.total, res.best.ref_len)
            for ex, res in zip(examples, report.per_utterance)]
    return metrics.make_blocks(rows, block_size)


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.1f}"
    return str(x)


def _print_table(rows, header):
    table = [header] + [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r, row in enumerate(table):
        line = "  ".join(
            cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
            for i, cell in enumerate(row)
        )
        print(line.rstrip())


def cmd_evaluate(args) -> int:
    cfg = load_run_config(args.run_config)
    resamples = args.resamples if args.resamples is not None else cfg.bootstrap_resamples
    block_size = args.block_size if args.block_size is not None else cfg.bootstrap_block_size
    seed = args.seed if args.seed is not None else cfg.bootstrap_seed

    examples, entries = _load_system(args.system)
    report = metrics.evaluate(entries)
    domain_reports = _group_reports(examples, entries, "domain")
    split_reports = _group_reports(examples, entries, "split")

    report_obj = {
        "schema": REPORT_SCHEMA,
        "config_hash": cfg.hash(),
        "system": os.path.basename(args.system),
        "overall": _section(report),
        "domains": {d: _section(r) for d, r in domain_reports.items()},
        "splits": {s: _section(r) for s, r in split_reports.items()},
        "tavg": _tavg(split_reports),
        "comparison": None,
    }

    comparison = None
    if args.baseline:
        base_examples, base_entries = _load_system(args.baseline)
        sys_ids = {ex.utterance_id for ex in examples}
        base_ids = {ex.utterance_id for ex in base_examples}
        if sys_ids != base_ids:
            missing = sorted(sys_ids ^ base_ids)[:5]
            raise DataError(f"utterance ids differ between {args.system} and "
                            f"{args.baseline} (first differences: {missing})")
        base_report = metrics.evaluate(base_entries)
        ids_a, blocks_base = _sower_blocks(base_examples, base_report, block_size)
        _, blocks_sys = _sower_blocks(examples, report, block_size)
        lo, hi = metrics.bootstrap_delta(blocks_base, blocks_sys, resamples, seed,
                                         block_ids=ids_a)
        comparison = {
            "baseline": os.path.basename(args.baseline),
            "baseline_sower": _round1(base_report.corpus_sower),
            "delta_p2_5": _round1(lo),
            "delta_p97_5": _round1(hi),
            "blocks": len(blocks_base),
            "block_size": block_size,
            "resamples": resamples,
            "seed": seed,
        }
        report_obj["comparison"] = comparison

    report_path = args.report or cfg.outputs.get("report")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as f:
            f.write(json.dumps(report_obj, ensure_ascii=False, sort_keys=True, indent=2))
            f.write("\n")

    header = ["group", "utts", "ref_words", "sower", "sower_1w", "oracle_wer"]
    rows = [["overall", report.n_utterances, report.counts.ref_len,
             _round1(report.corpus_sower), _round1(report.first_word_sower),
             _round1(report.corpus_oracle_wer)]]
    for label, rep in split_reports.items():
        rows.append([f"split:{label}", rep.n_utterances, rep.counts.ref_len,
                     _round1(rep.corpus_sower), _round1(rep.first_word_sower),
                     _round1(rep.corpus_oracle_wer)])
    for label, rep in domain_reports.items():
        rows.append([f"domain:{label}", rep.n_utterances, rep.counts.ref_len,
                     _round1(rep.corpus_sower), _round1(rep.first_word_sower),
                     _round1(rep.corpus_oracle_wer)])
    _print_table(rows, header)
    tavg = report_obj["tavg"]
    if tavg:
        print(f"tavg: sower={_fmt(tavg['sower'])} sower_1w={_fmt(tavg['first_word_sower'])} "
              f"oracle_wer={_fmt(tavg['oracle_wer'])}")
    if comparison:
        print(f"improvement over {comparison['baseline']}: "
              f"delta_p2.5={_fmt(comparison['delta_p2_5'])} "
              f"delta_p97.5={_fmt(comparison['delta_p97_5'])} "
              f"(blocks={comparison['blocks']}, resamples={comparison['resamples']}, "
              f"seed={comparison['seed']})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# werr


def cmd_werr(args) -> int:
    try:
        value = metrics.werr(args.system, args.baseline, args.topline)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(f"{value:.1f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> CliParser:
    parser = CliParser(prog="specasr",
                       description="Speculative speech recognition toolkit: "
                                   "suffix alignment, speculation, and oracle metrics.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("align", help="label externally supplied hypothesis prefixes "
                                     "against their references")
    p.add_argument("--hyps", required=True, help="JSONL with {id, hyp_prefix} records")
    p.add_argument("--refs", required=True, help="JSONL with {id, reference[, domain, split]}")
    p.add_argument("-o", "--out", help="output examples JSONL")
    p.add_argument("--run-config", help="run config JSON")
    p.add_argument("--verify", action="store_true",
                   help="cross-check every split against the per-split brute force")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("simulate", help="generate labeled examples by truncating and "
                                        "corrupting references")
    p.add_argument("--corpus", required=True, help="utterances JSONL")
    p.add_argument("-o", "--out", help="output examples JSONL")
    p.add_argument("--run-config", help="run config JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train-lm", help="count an n-gram model from newline-delimited "
                                        "sentences (optional tab-separated context tag)")
    p.add_argument("--corpus", required=True, help="plain-text training sentences")
    p.add_argument("--order", type=int, help="n-gram order (default 3)")
    p.add_argument("--backoff", type=float, help="backoff factor (default 0.4)")
    p.add_argument("-o", "--out", help="output model JSON")
    p.add_argument("--run-config", help="run config JSON")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("speculate", help="attach ranked candidate suffixes to examples")
    p.add_argument("--examples", required=True, help="examples JSONL")
    p.add_argument("--model", help="model file (ngram/random kinds)")
    p.add_argument("--kind", choices=SPECULATOR_KINDS, help="speculator kind (default ngram)")
    p.add_argument("--k", type=int, help="number of ranked suffixes to keep (default 8)")
    p.add_argument("--beam-width", type=int, help="beam width (default max(16, k))")
    p.add_argument("--max-suffix-len", type=int, help="suffix length cap (default 10)")
    p.add_argument("--seed", type=int, help="seed for the random kind")
    p.add_argument("--condition-on-domain", action="store_true",
                   help="route scoring through each record's domain submodel")
    p.add_argument("-o", "--out", help="output speculated examples JSONL")
    p.add_argument("--run-config", help="run config JSON")
    p.set_defaults(func=cmd_speculate)

    p = sub.add_parser("evaluate", help="score speculated examples; with --baseline, "
                                         "bootstrap the improvement")
    p.add_argument("--system", required=True, help="speculated examples JSONL")
    p.add_argument("--baseline", help="second system for the bootstrap comparison")
    p.add_argument("--report", help="write the machine-readable report here")
    p.add_argument("--resamples", type=int, help="bootstrap resamples (default 10000)")
    p.add_argument("--block-size", type=int, help="utterances per bootstrap block (default 1)")
    p.add_argument("--seed", type=int, help="bootstrap seed (default 0)")
    p.add_argument("--run-config", help="run config JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("werr", help="percentage of the baseline-to-topline gap recovered")
    p.add_argument("system", type=float)
    p.add_argument("baseline", type=float)
    p.add_argument("topline", type=float)
    p.set_defaults(func=cmd_werr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
