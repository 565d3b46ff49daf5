"""Automatic evaluation: semantic similarity and paired significance testing.

Each system's outputs are scored by cosine similarity of sentence embeddings
with the corresponding inputs (reported on a 0-100 scale with one decimal,
like the usual similarity tables). System pairs are compared with a two-sided
paired sign-flip randomization test on the per-item scores:

    stat = |mean(A) - mean(B)|

Each iteration flips every paired item's assignment independently with
probability 1/2 and recomputes the statistic; the p-value is
``(hits + 1) / (R + 1)``. For n <= 20 items the test enumerates all 2^n flip
patterns instead and returns the exact proportion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backends import SentenceEncoder, stable_u64
from .errors import DataError

SCHEMA_VERSION = 1

EXACT_MODE_MAX_N = 20

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "schema_version", "task", "n_items", "seed", "iterations",
        "item_ids", "systems", "significance",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "task": {"type": "string"},
        "n_items": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "iterations": {"type": "integer", "minimum": 1},
        "item_ids": {"type": "array", "items": {"type": "string"}},
        "systems": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["mean", "scores"],
                "properties": {
                    "mean": {"type": "number"},
                    "scores": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "significance": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["system_a", "system_b", "p_value"],
                "properties": {
                    "system_a": {"type": "string"},
                    "system_b": {"type": "string"},
                    "p_value": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class SimilarityScore:
    value: float  # cosine in [-1, 1]
    reported: float  # value * 100, one decimal


@dataclass(frozen=True)
class EvalConfig:
    iterations: int = 10_000
    seed: int = 0
    task: str = "partisan"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class EvaluationReport:
    task: str
    item_ids: tuple
    per_system: dict  # name -> {"mean": float, "scores": list}
    significance: dict  # (name_a, name_b) sorted tuple -> p-value
    n_items: int
    seed: int
    iterations: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "task": self.task,
            "n_items": self.n_items,
            "seed": self.seed,
            "iterations": self.iterations,
            "item_ids": list(self.item_ids),
            "systems": {
                name: {"mean": entry["mean"], "scores": list(entry["scores"])}
                for name, entry in self.per_system.items()
            },
            "significance": [
                {"system_a": a, "system_b": b, "p_value": p}
                for (a, b), p in sorted(self.significance.items())
            ],
        }
        out.update(self.extra)
        return out


def semantic_similarity(a: str, b: str, enc: SentenceEncoder) -> SimilarityScore:
    """Cosine similarity of the two encodings; zero vectors score 0.0."""
    if not a or not b:
        raise ValueError("texts must be non-empty")
    va = np.asarray(enc.encode(a), dtype=np.float64)
    vb = np.asarray(enc.encode(b), dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        value = 0.0
    else:
        value = float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))
    return SimilarityScore(value=value, reported=round(value * 100, 1))


def _exact_p(diffs: np.ndarray) -> float:
    # Subset sums by doubling: after processing item i, `sums` holds the sum
    # of every subset of diffs[:i+1]; flipping subset S gives total - 2*sum(S).
    total = float(diffs.sum())
    n = len(diffs)
    observed = abs(total) / n
    sums = np.zeros(1, dtype=np.float64)
    for d in diffs:
        sums = np.concatenate([sums, sums + d])
    perm_stats = np.abs(total - 2.0 * sums) / n
    return float(np.count_nonzero(perm_stats >= observed)) / float(2**n)


def _approx_p(diffs: np.ndarray, iterations: int, seed: int) -> float:
    total = float(diffs.sum())
    n = len(diffs)
    observed = abs(total) / n
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, min(iterations, 10_000_000 // max(n, 1)))
    done = 0
    while done < iterations:
        size = min(chunk, iterations - done)
        signs = rng.integers(0, 2, size=(size, n)) * 2 - 1
        stats = np.abs(signs @ diffs) / n
        hits += int(np.count_nonzero(stats >= observed))
        done += size
    return (hits + 1) / (iterations + 1)


def randomization_test(
    scores_a,
    scores_b,
    iterations: int = 10_000,
    seed: int = 0,
    mode: str = "auto",
) -> float:
    """Two-sided paired sign-flip test on the difference of means.

    ``mode`` is ``auto`` (exact enumeration when n <= 20, Monte Carlo
    otherwise), ``exact``, or ``approx``.
    """
    a = np.asarray(list(scores_a), dtype=np.float64)
    b = np.asarray(list(scores_b), dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.size < 1:
        raise DataError("need at least one paired score")
    if mode not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown mode {mode!r}")
    diffs = a - b
    if mode == "exact" or (mode == "auto" and a.size <= EXACT_MODE_MAX_N):
        if a.size > 26:
            raise ValueError("exact mode is limited to 26 items")
        return _exact_p(diffs)
    return _approx_p(diffs, iterations, seed)


def build_report(
    inputs: dict,
    outputs_by_system: dict,
    enc: SentenceEncoder,
    cfg: EvalConfig | None = None,
) -> EvaluationReport:
    """Score every system on every item and test all system pairs.

    ``inputs`` maps item id -> input text; ``outputs_by_system`` maps system
    name -> (item id -> output text). Every system must cover every item.
    """
    cfg = cfg or EvalConfig()
    item_ids = tuple(inputs)
    if not item_ids:
        raise DataError("no items to evaluate")

    per_system = {}
    for name in sorted(outputs_by_system):
        outputs = outputs_by_system[name]
        scores = []
        for item_id in item_ids:
            if item_id not in outputs:
                raise DataError(f"system {name!r} is missing item {item_id!r}")
            scores.append(
                semantic_similarity(inputs[item_id], outputs[item_id], enc).reported
            )
        per_system[name] = {"mean": float(np.mean(scores)), "scores": scores}

    names = sorted(per_system)
    significance = {}
    for i, name_a in enumerate(names):
        for name_b in names[i + 1 :]:
            pair_seed = stable_u64("sig", cfg.seed, name_a, name_b) % (2**32)
            significance[(name_a, name_b)] = randomization_test(
                per_system[name_a]["scores"],
                per_system[name_b]["scores"],
                iterations=cfg.iterations,
                seed=pair_seed,
            )

    return EvaluationReport(
        task=cfg.task,
        item_ids=item_ids,
        per_system=per_system,
        significance=significance,
        n_items=len(item_ids),
        seed=cfg.seed,
        iterations=cfg.iterations,
    )


def render_table(report: EvaluationReport) -> str:
    """Plain-text table: per-system mean similarity plus pairwise p-values."""
    lines = []
    header = f"Semantic similarity with input ({report.task} task, n={report.n_items})"
    lines.append(header)
    lines.append("-" * len(header))
    width = max((len(n) for n in report.per_system), default=6)
    for name in sorted(report.per_system):
        lines.append(f"{name:<{width}}  {report.per_system[name]['mean']:.1f}")
    if report.significance:
        lines.append("")
        lines.append("Pairwise significance (paired sign-flip randomization):")
        for (a, b), p in sorted(report.significance.items()):
            lines.append(f"  {a} vs {b}: p = {p:.4g}")
    return "\n".join(lines)
