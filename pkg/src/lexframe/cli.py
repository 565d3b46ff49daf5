"""Command-line pipeline driver.

Subcommands::

    lexframe build-data  --config CFG [--seed N] [--workers N] [--out DIR]
    lexframe train       --config CFG [--seed N] [--out DIR]
    lexframe build-test  --config CFG [--seed N] [--workers N] [--out FILE]
    lexframe reframe     --config CFG TESTSET [--seed N] [--out FILE]
    lexframe lexrep      --config CFG TESTSET [--seed N] [--out FILE]
    lexframe evaluate    --config CFG NAME=OUTPUTS.jsonl ... [--out FILE]

The config file is flat ``key = value`` text (``#`` comments); any key can be
overridden on the command line with ``--set key=value``, and relative paths
resolve against the config file's directory. Artifacts embed the schema
version, a hash of the effective configuration, and the seed, and rerunning a
subcommand with identical inputs reproduces them byte for byte under mock
backends.

Exit codes: 0 success, 2 configuration or usage error, 3 data/validation
error, 4 backend failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys

from . import corpus as corpus_mod
from . import evaluate as evaluate_mod
from . import pairformat, rewrite
from . import reframe as reframe_mod
from .backends import load_backend, stable_u64
from .errors import BackendError, ConfigError, DataError
from .lexicon import (
    Lexicons,
    load_collocations,
    load_connotation_lexicon,
    load_emotion_lexicon,
)

SCHEMA_VERSION = 1

_DEFAULTS = {
    "connotation_lexicon": "",
    "emotion_lexicon": "",
    "collocations": "",
    "corpus": "",
    "out_dir": "out",
    "infiller": "mock:",
    "generator": "mock:",
    "scorer": "mock:",
    "encoder": "mock:",
    "classifier": "mock:",
    "mode": "different",
    "top_n": "20",
    "max_spans": "",
    "train_ratio": "0.9",
    "train_tsv": "",
    "val_tsv": "",
    "epochs": "20",
    "max_tokens_per_batch": "1024",
    "k_values": "5,10,15,20,25,30,35,40,45,50",
    "samples_per_k": "1",
    "max_len": "128",
    "use_demarcators": "true",
    "use_entailment": "true",
    "control_code": "trust",
    "nli_direction": "fwd",
    "checkpoint": "",
    "task": "partisan",
    "sample_size": "100",
    "iterations": "10000",
    "seed": "0",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class PipelineConfig:
    """Effective configuration: file values plus command-line overrides."""

    def __init__(self, values: dict, base_dir: str):
        unknown = set(values) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        self.values = dict(_DEFAULTS)
        self.values.update(values)
        self.base_dir = base_dir

    def raw(self, key: str) -> str:
        return self.values[key]

    def path(self, key: str, required: bool = True) -> str | None:
        value = self.values[key]
        if not value:
            if required:
                raise ConfigError(f"config key {key!r} is required for this command")
            return None
        resolved = value if os.path.isabs(value) else os.path.join(self.base_dir, value)
        if not os.path.exists(resolved):
            raise ConfigError(f"{key}: path does not exist: {resolved}")
        return resolved

    def int_(self, key: str) -> int:
        try:
            return int(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {self.values[key]!r}") from None

    def float_(self, key: str) -> float:
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {self.values[key]!r}") from None

    def bool_(self, key: str) -> bool:
        value = self.values[key].strip().lower()
        if value in _TRUE:
            return True
        if value in _FALSE:
            return False
        raise ConfigError(f"{key} must be a boolean, got {self.values[key]!r}")

    def int_list(self, key: str) -> tuple:
        try:
            return tuple(int(p) for p in self.values[key].split(",") if p.strip())
        except ValueError:
            raise ConfigError(f"{key} must be comma-separated integers") from None

    @property
    def seed(self) -> int:
        return self.int_("seed")

    def config_hash(self) -> str:
        blob = "\n".join(f"{k}={self.values[k]}" for k in sorted(self.values))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]

    def backend(self, kind: str):
        return load_backend(kind, self.values[kind], base_dir=self.base_dir)

    def rewrite_mode(self) -> rewrite.RewriteMode:
        value = self.values["mode"].strip().lower()
        if value == "different":
            return rewrite.DIFFERENT
        if value.startswith("prefer:"):
            try:
                return rewrite.prefer(value.split(":", 1)[1])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        raise ConfigError(f"mode must be 'different' or 'prefer:<emotion>', got {value!r}")

    def rewrite_options(self) -> rewrite.RewriteOptions:
        max_spans = self.values["max_spans"].strip()
        return rewrite.RewriteOptions(
            top_n=self.int_("top_n"),
            max_spans=int(max_spans) if max_spans else None,
        )

    def sweep(self, seed: int | None = None) -> reframe_mod.SweepConfig:
        try:
            return reframe_mod.SweepConfig(
                k_values=self.int_list("k_values"),
                samples_per_k=self.int_("samples_per_k"),
                seed=self.seed if seed is None else seed,
                max_len=self.int_("max_len"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def reframe_config(self) -> reframe_mod.ReframeConfig:
        try:
            return reframe_mod.ReframeConfig(
                use_demarcators=self.bool_("use_demarcators"),
                use_entailment=self.bool_("use_entailment"),
                control_code=self.values["control_code"],
                nli_direction=self.values["nli_direction"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return values


def load_config(args) -> PipelineConfig:
    values = parse_config_file(args.config)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    if args.seed is not None:
        values["seed"] = str(args.seed)
    return PipelineConfig(values, base_dir)


def _artifact_meta(cfg: PipelineConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
    }


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def _load_lexicons(cfg: PipelineConfig, need=("connotation",)) -> Lexicons:
    connotation = emotion = collocations = None
    if "connotation" in need:
        connotation = load_connotation_lexicon(cfg.path("connotation_lexicon"))
    if "emotion" in need:
        emotion = load_emotion_lexicon(cfg.path("emotion_lexicon"))
    if "collocations" in need:
        collocations = load_collocations(cfg.path("collocations"))
    return Lexicons(connotation=connotation, emotion=emotion, collocations=collocations)


def _out_dir(cfg: PipelineConfig, args) -> str:
    out = args.out or os.path.join(cfg.base_dir, cfg.raw("out_dir"))
    os.makedirs(out, exist_ok=True)
    return out


def cmd_build_data(cfg: PipelineConfig, args) -> int:
    lexicons = _load_lexicons(cfg)
    ratio = cfg.float_("train_ratio")
    if not (0.0 < ratio < 1.0):
        raise ConfigError(f"train_ratio must be in (0, 1), got {ratio}")
    records = corpus_mod.ingest(cfg.path("corpus"))
    classifier = cfg.backend("classifier")
    infiller = cfg.backend("infiller")
    mode = cfg.rewrite_mode()
    options = cfg.rewrite_options()

    class_stats: dict = {}
    labeled = corpus_mod.classify_arguments(
        records, classifier, workers=args.workers, stats=class_stats
    )
    premises = corpus_mod.filter_premises(labeled)

    stats = rewrite.RewriteStats()
    pairs = []
    no_replacement = 0
    for record in premises:
        result = rewrite.rewrite_sentence(
            record.text, mode, infiller, lexicons.connotation, options, stats
        )
        if not result.replacements:
            no_replacement += 1
            continue
        pairs.append(pairformat.serialize_pair(result))

    random.Random(cfg.seed).shuffle(pairs)
    n_train = int(len(pairs) * ratio)
    train_pairs, val_pairs = pairs[:n_train], pairs[n_train:]

    out = _out_dir(cfg, args)
    train_path = os.path.join(out, "train.tsv")
    val_path = os.path.join(out, "val.tsv")
    pairformat.write_tsv(train_pairs, train_path)
    pairformat.write_tsv(val_pairs, val_path)
    sidecar = dict(_artifact_meta(cfg))
    sidecar.update(
        {
            "corpus_records": len(records),
            "premises": len(premises),
            "pairs_total": len(pairs),
            "pairs_train": len(train_pairs),
            "pairs_val": len(val_pairs),
            "sentences_without_replacements": no_replacement,
            "rewrite": stats.as_dict(),
            "classifier_failures": class_stats.get("classifier_failures", 0),
        }
    )
    _write_json(os.path.join(out, "build_stats.json"), sidecar)
    print(
        f"build-data: {len(train_pairs)} train / {len(val_pairs)} val pairs "
        f"from {len(premises)} premises -> {out}"
    )
    return 0


def cmd_train(cfg: PipelineConfig, args) -> int:
    train_pairs = pairformat.read_tsv(cfg.path("train_tsv"))
    val_path = cfg.path("val_tsv", required=False)
    val_pairs = pairformat.read_tsv(val_path) if val_path else []
    generator = cfg.backend("generator")
    train_cfg = reframe_mod.TrainConfig(
        epochs=cfg.int_("epochs"),
        max_tokens_per_batch=cfg.int_("max_tokens_per_batch"),
        seed=cfg.seed,
    )
    trained = reframe_mod.fine_tune(train_pairs, val_pairs, generator, train_cfg)

    out = _out_dir(cfg, args)
    metrics_path = os.path.join(out, "train_metrics.jsonl")
    with open(metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        for row in trained.epoch_log:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    checkpoint = dict(_artifact_meta(cfg))
    checkpoint.update(
        {
            "best_epoch": trained.best_epoch,
            "epochs": train_cfg.epochs,
            "train_pairs": trained.train_pair_count,
            "val_pairs": trained.val_pair_count,
            "generator": cfg.raw("generator"),
        }
    )
    _write_json(os.path.join(out, "checkpoint.json"), checkpoint)
    print(f"train: best epoch {trained.best_epoch}/{train_cfg.epochs} -> {out}")
    return 0


def _load_checkpoint(cfg: PipelineConfig):
    path = cfg.path("checkpoint", required=False)
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _trained_generator(cfg: PipelineConfig) -> reframe_mod.TrainedGenerator:
    generator = cfg.backend("generator")
    checkpoint = _load_checkpoint(cfg)
    return reframe_mod.TrainedGenerator(
        generator=generator,
        best_epoch=checkpoint.get("best_epoch") if checkpoint else None,
    )


def cmd_reframe(cfg: PipelineConfig, args) -> int:
    rows = corpus_mod.read_test_set(args.testset)
    reframe_cfg = cfg.reframe_config()
    trained = _trained_generator(cfg)
    scorer = cfg.backend("scorer") if reframe_cfg.use_entailment else None
    meta = _artifact_meta(cfg)
    config_blob = {
        **meta,
        "use_demarcators": reframe_cfg.use_demarcators,
        "use_entailment": reframe_cfg.use_entailment,
        "control_code": reframe_cfg.control_code,
        "nli_direction": reframe_cfg.nli_direction,
    }

    out_path = args.out or os.path.join(cfg.base_dir, "reframed.jsonl")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for record, spans in rows:
            sweep = cfg.sweep(seed=stable_u64("record", cfg.seed, record.id))
            output = reframe_mod.reframe(record, spans, reframe_cfg, trained, scorer, sweep)
            row = {
                "id": record.id,
                "input": record.text,
                "output": output.text,
                "config": config_blob,
                "candidates": [
                    {
                        "text": c.text,
                        "k": c.k,
                        "entail_prob": getattr(c, "entail_prob", None),
                    }
                    for c in output.candidates
                ],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"reframe: {len(rows)} records -> {out_path}")
    return 0


def cmd_lexrep(cfg: PipelineConfig, args) -> int:
    rows = corpus_mod.read_test_set(args.testset)
    lexicons = _load_lexicons(cfg)
    infiller = cfg.backend("infiller")
    stats = rewrite.RewriteStats()
    meta = _artifact_meta(cfg)

    out_path = args.out or os.path.join(cfg.base_dir, "lexrep.jsonl")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for record, spans in rows:
            output = rewrite.lexrep_reframe(
                record.text,
                spans,
                infiller,
                lexicons.connotation,
                top_n=cfg.int_("top_n"),
                stats=stats,
            )
            row = {"id": record.id, "input": record.text, "output": output, "config": meta}
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"lexrep: {len(rows)} records -> {out_path}")
    return 0


def _read_outputs(path: str) -> dict:
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rows[str(obj["id"])] = (str(obj["input"]), str(obj["output"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no output rows")
    return rows


def cmd_evaluate(cfg: PipelineConfig, args) -> int:
    systems = {}
    for item in args.systems:
        if "=" not in item:
            raise ConfigError(f"expected NAME=PATH, got {item!r}")
        name, _, path = item.partition("=")
        if name in systems:
            raise ConfigError(f"duplicate system name {name!r}")
        systems[name] = _read_outputs(path)

    names = list(systems)
    reference = systems[names[0]]
    inputs = {item_id: pair[0] for item_id, pair in reference.items()}
    for name in names[1:]:
        if set(systems[name]) != set(reference):
            raise DataError(f"system {name!r} covers different item ids than {names[0]!r}")
        for item_id, (input_text, _) in systems[name].items():
            if input_text != inputs[item_id]:
                raise DataError(f"system {name!r} disagrees on input for item {item_id!r}")

    encoder = cfg.backend("encoder")
    eval_cfg = evaluate_mod.EvalConfig(
        iterations=cfg.int_("iterations"), seed=cfg.seed, task=cfg.raw("task")
    )
    outputs_by_system = {
        name: {item_id: pair[1] for item_id, pair in rows.items()}
        for name, rows in systems.items()
    }
    report = evaluate_mod.build_report(inputs, outputs_by_system, encoder, eval_cfg)
    report.extra["config_hash"] = cfg.config_hash()

    out_path = args.out or os.path.join(cfg.base_dir, "report.json")
    _write_json(out_path, report.to_dict())
    print(evaluate_mod.render_table(report))
    print(f"evaluate: report -> {out_path}")
    return 0


def cmd_build_test(cfg: PipelineConfig, args) -> int:
    task = cfg.raw("task")
    need = ["connotation"]
    need.append("collocations" if task == "partisan" else "emotion")
    lexicons = _load_lexicons(cfg, need=tuple(need))
    records = corpus_mod.ingest(cfg.path("corpus"))
    if task == "fear":
        # Fear-task arguments are premises; partisan arguments are used as-is.
        classifier = cfg.backend("classifier")
        records = corpus_mod.filter_premises(
            corpus_mod.classify_arguments(records, classifier, workers=args.workers)
        )
    try:
        test_set = corpus_mod.build_test_set(
            records, task, lexicons, n=cfg.int_("sample_size"), seed=cfg.seed
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out_path = args.out or os.path.join(cfg.base_dir, f"testset_{task}.jsonl")
    corpus_mod.write_test_set(test_set, out_path)
    print(f"build-test: {len(test_set.records)} records ({task}) -> {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexframe", description="Connotation-guided argument reframing pipeline."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=1, help="parallel classifier workers")
        p.add_argument("--out", default=None, help=out_help)
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )

    p = sub.add_parser("build-data", help="construct the parallel training corpus")
    common(p, "output directory (train.tsv, val.tsv, build_stats.json)")
    p.set_defaults(func=cmd_build_data)

    p = sub.add_parser("train", help="fine-tune the generator on a pair file")
    common(p, "output directory (checkpoint.json, train_metrics.jsonl)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("build-test", help="filter and sample a task test set")
    common(p, "output test-set JSONL path")
    p.set_defaults(func=cmd_build_test)

    p = sub.add_parser("reframe", help="reframe a test set with the generator")
    common(p, "output JSONL path")
    p.add_argument("testset", help="test-set JSONL with span annotations")
    p.set_defaults(func=cmd_reframe)

    p = sub.add_parser("lexrep", help="lexical-replacement baseline over a test set")
    common(p, "output JSONL path")
    p.add_argument("testset", help="test-set JSONL with span annotations")
    p.set_defaults(func=cmd_lexrep)

    p = sub.add_parser("evaluate", help="similarity report over system outputs")
    common(p, "output report JSON path")
    p.add_argument("systems", nargs="+", metavar="NAME=PATH", help="system output files")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 4


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
