"""Argument corpus ingestion, classification, and test-set construction.

Corpora are JSONL (one object per line, required ``id`` and ``text``). The
claim/premise classifier is pluggable; a deterministic rule stub in
:mod:`lexframe.backends` backs desk-scale runs. Test sets filter records to
those containing at least one target span (a partisan collocation or a
fear-bearing word) and sample uniformly without replacement under a seed.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .backends import ARGUMENT_LABELS, ArgumentClassifier
from .errors import DataError
from .lexicon import (
    Lexicons,
    TokenSpan,
    find_collocations,
    find_emotion_words,
    tokenize,
)

TASKS = ("partisan", "fear")


@dataclass(frozen=True)
class ArgumentRecord:
    id: str
    text: str
    source: str = ""
    label: str | None = None


@dataclass(frozen=True)
class SampledTestSet:
    task: str
    records: tuple
    spans: tuple  # per-record tuple of TokenSpan
    seed: int


def ingest(path) -> list[ArgumentRecord]:
    """Read a JSONL corpus; embedded tabs/newlines collapse to single spaces."""
    records = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: malformed JSON: {exc}") from None
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise DataError(f"{path}: line {lineno}: object needs 'id' and 'text'")
            rid = str(obj["id"])
            text = " ".join(str(obj["text"]).split())
            if not text:
                raise DataError(f"{path}: line {lineno}: empty text")
            if rid in seen_ids:
                raise DataError(f"{path}: line {lineno}: duplicate id {rid!r}")
            seen_ids.add(rid)
            label = obj.get("label")
            if label is not None and label not in ARGUMENT_LABELS:
                raise DataError(f"{path}: line {lineno}: unknown label {label!r}")
            records.append(
                ArgumentRecord(id=rid, text=text, source=str(obj.get("source", "")), label=label)
            )
    return records


def classify_arguments(
    records,
    classifier: ArgumentClassifier,
    workers: int = 1,
    stats: dict | None = None,
) -> list[ArgumentRecord]:
    """Label every record; order is preserved.

    A classifier exception on one item labels that record ``non_argument``
    and bumps ``stats["classifier_failures"]``.
    """
    records = list(records)

    def one(record):
        try:
            return classifier.classify(record.text)
        except Exception:
            if stats is not None:
                stats["classifier_failures"] = stats.get("classifier_failures", 0) + 1
            return "non_argument"

    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(one, records))
    else:
        labels = [one(r) for r in records]
    return [replace(r, label=label) for r, label in zip(records, labels)]


def filter_premises(records) -> list[ArgumentRecord]:
    out = []
    for record in records:
        if record.label is None:
            raise DataError(f"record {record.id!r} is unlabeled")
        if record.label == "premise":
            out.append(record)
    return out


def _spans_for(record: ArgumentRecord, task: str, lexicons: Lexicons):
    if task == "partisan":
        if lexicons.collocations is None:
            raise DataError("partisan task needs a collocation list")
        return find_collocations(record.text, lexicons.collocations)
    if lexicons.emotion is None:
        raise DataError("fear task needs an emotion lexicon")
    return find_emotion_words(record.text, lexicons.emotion, "fear")


def build_test_set(
    records, task: str, lexicons: Lexicons, n: int, seed: int
) -> SampledTestSet:
    """Filter to records containing a target span and sample ``n`` of them.

    Sampling is uniform without replacement and deterministic for a fixed
    ``(records, n, seed)``; sampled records keep their corpus order. When the
    filtered pool is smaller than ``n`` the whole pool is returned.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if n < 1:
        raise ValueError("sample size must be >= 1")

    pool = []
    for record in records:
        spans = _spans_for(record, task, lexicons)
        if spans:
            pool.append((record, tuple(spans)))
    if not pool:
        raise DataError("no matching arguments")

    if len(pool) <= n:
        chosen = pool
    else:
        indices = sorted(random.Random(seed).sample(range(len(pool)), n))
        chosen = [pool[i] for i in indices]
    return SampledTestSet(
        task=task,
        records=tuple(rec for rec, _ in chosen),
        spans=tuple(spans for _, spans in chosen),
        seed=seed,
    )


def write_test_set(test_set: SampledTestSet, path) -> None:
    """Write the corpus JSONL shape plus per-record span offsets."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record, spans in zip(test_set.records, test_set.spans):
            row = {
                "id": record.id,
                "text": record.text,
                "source": record.source,
                "label": record.label,
                "spans": [
                    {"start": s.start_char, "end": s.end_char, "surface": s.surface}
                    for s in spans
                ],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def read_test_set(path) -> list[tuple[ArgumentRecord, tuple]]:
    """Read ``(record, spans)`` rows written by :func:`write_test_set`."""
    records = {r.id: r for r in ingest(path)}
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            record = records[str(raw["id"])]
            tokens = tokenize(record.text)
            spans = []
            for item in raw.get("spans", []):
                start, end = int(item["start"]), int(item["end"])
                covered = [t for t in tokens if start <= t.start_char and t.end_char <= end]
                if not covered:
                    raise DataError(
                        f"{path}: record {record.id!r}: span [{start}, {end}) covers no tokens"
                    )
                span = TokenSpan(
                    start_char=start,
                    end_char=end,
                    token_start=covered[0].token_start,
                    token_end=covered[-1].token_end,
                    surface=str(item["surface"]),
                )
                try:
                    span.validate_against(record.text)
                except ValueError as exc:
                    raise DataError(f"{path}: record {record.id!r}: {exc}") from None
                spans.append(span)
            out.append((record, tuple(spans)))
    return out
