"""Fine-tuning harness, top-k sampling sweep, and entailment reranking.

The generator is fine-tuned on serialized pairs and then sampled with a range
of top-k values (default k = 5, 10, ..., 50, one sample each). Sampling a
sentence several ways produces candidates that vary in how boldly they
rewrite; the reranker scores every candidate against the input argument with
a natural-language-inference model and keeps the one most entailed by the
input, which is what preserves the denotative meaning. Two ablation switches
reproduce the weaker variants: no demarcators (the generator gets no signal
about what to edit) and no entailment (the first sample of the smallest k
wins).
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import EntailmentScorer, Seq2SeqGenerator, stable_u64
from .errors import BackendError, DataError
from .lexicon import ALL_LABELS
from .pairformat import build_inference_source

NLI_DIRECTIONS = ("fwd", "bwd", "min")

DEFAULT_K_VALUES = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    max_tokens_per_batch: int = 1024
    checkpoint_metric: str = "validation_perplexity"
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.checkpoint_metric != "validation_perplexity":
            raise ValueError("checkpoint selection is fixed to validation perplexity")


@dataclass(frozen=True)
class SweepConfig:
    k_values: tuple = DEFAULT_K_VALUES
    samples_per_k: int = 1
    seed: int = 0
    max_len: int = 128

    def __post_init__(self):
        if not self.k_values:
            raise ValueError("k_values must be non-empty")
        if any(k < 1 for k in self.k_values):
            raise ValueError("all k values must be >= 1")
        if self.samples_per_k < 1:
            raise ValueError("samples_per_k must be >= 1")


@dataclass(frozen=True)
class ReframeConfig:
    use_demarcators: bool = True
    use_entailment: bool = True
    control_code: str = "trust"
    nli_direction: str = "fwd"

    def __post_init__(self):
        if self.control_code not in ALL_LABELS:
            raise ValueError(f"unknown control code {self.control_code!r}")
        if self.nli_direction not in NLI_DIRECTIONS:
            raise ValueError(f"nli_direction must be one of {NLI_DIRECTIONS}")


@dataclass(frozen=True)
class Candidate:
    text: str
    k: int


@dataclass(frozen=True)
class RankedCandidate:
    text: str
    k: int
    entail_prob: float
    scores: tuple  # (entailment, neutral, contradiction)

    def __post_init__(self):
        if not (0.0 <= self.entail_prob <= 1.0):
            raise ValueError("entail_prob must lie in [0, 1]")
        if self.entail_prob != self.scores[0]:
            raise ValueError("entail_prob must equal the entailment component")


@dataclass(frozen=True)
class TrainedGenerator:
    """A generator plus the checkpoint bookkeeping from fine-tuning."""

    generator: Seq2SeqGenerator
    best_epoch: int | None = None
    epoch_log: tuple = ()
    train_pair_count: int = 0
    val_pair_count: int = 0

    def sample(self, source: str, k: int, seed: int, max_len: int) -> str:
        return self.generator.sample(source, k, seed, max_len)


@dataclass
class ReframeOutput:
    text: str
    candidates: tuple
    config: ReframeConfig


def fine_tune(train_pairs, val_pairs, gen: Seq2SeqGenerator, cfg: TrainConfig) -> TrainedGenerator:
    """Fine-tune and keep the epoch with the lowest validation perplexity."""
    train_pairs = list(train_pairs)
    val_pairs = list(val_pairs)
    if not train_pairs:
        raise DataError("empty training set")
    handle = gen.fine_tune(
        train_pairs,
        val_pairs,
        {
            "epochs": cfg.epochs,
            "max_tokens_per_batch": cfg.max_tokens_per_batch,
            "seed": cfg.seed,
        },
    )
    metrics = handle.get("epoch_metrics", [])
    if len(metrics) != cfg.epochs:
        raise BackendError(
            f"generator reported {len(metrics)} epochs, expected {cfg.epochs}"
        )
    best_epoch = min(metrics, key=lambda row: row["val_perplexity"])["epoch"]
    log = tuple(
        {
            "epoch": row["epoch"],
            "val_perplexity": row["val_perplexity"],
            "train_pairs": len(train_pairs),
        }
        for row in metrics
    )
    return TrainedGenerator(
        generator=gen,
        best_epoch=best_epoch,
        epoch_log=log,
        train_pair_count=len(train_pairs),
        val_pair_count=len(val_pairs),
    )


def derive_seed(seed: int, k: int, sample_index: int) -> int:
    """Per-(k, sample) seed so candidate sets are schedule-independent."""
    return stable_u64("sweep", seed, k, sample_index)


def generate_candidates(
    source: str, gen, sweep: SweepConfig, stats: dict | None = None
) -> list[Candidate]:
    """Sample the sweep and drop exact-duplicate strings (first occurrence wins)."""
    seen = set()
    candidates = []
    failures = 0
    for k in sweep.k_values:
        for i in range(sweep.samples_per_k):
            try:
                text = gen.sample(source, k, derive_seed(sweep.seed, k, i), sweep.max_len)
            except Exception:
                failures += 1
                if stats is not None:
                    stats["generator_failures"] = stats.get("generator_failures", 0) + 1
                continue
            if text not in seen:
                seen.add(text)
                candidates.append(Candidate(text=text, k=k))
    if not candidates:
        raise BackendError(f"generator produced no candidates ({failures} failures)")
    return candidates


def _directional_scores(input_text, candidate_text, scorer, direction):
    if direction == "fwd":
        return scorer.score(input_text, candidate_text)
    if direction == "bwd":
        return scorer.score(candidate_text, input_text)
    fwd = scorer.score(input_text, candidate_text)
    bwd = scorer.score(candidate_text, input_text)
    return fwd if fwd[0] <= bwd[0] else bwd


def rerank(
    input_text: str,
    candidates,
    scorer: EntailmentScorer,
    direction: str = "fwd",
) -> tuple[RankedCandidate, list[RankedCandidate]]:
    """Score candidates against the input and return the best plus the full order.

    The best candidate maximizes the entailment probability; ties break toward
    the smaller k, then lexicographic text order.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if direction not in NLI_DIRECTIONS:
        raise ValueError(f"direction must be one of {NLI_DIRECTIONS}")
    ranked = []
    for cand in candidates:
        scores = _directional_scores(input_text, cand.text, scorer, direction)
        ranked.append(
            RankedCandidate(text=cand.text, k=cand.k, entail_prob=scores[0], scores=scores)
        )
    ranked.sort(key=lambda c: (-c.entail_prob, c.k, c.text))
    return ranked[0], ranked


def reframe(
    record,
    spans,
    cfg: ReframeConfig,
    gen,
    scorer: EntailmentScorer | None,
    sweep: SweepConfig,
) -> ReframeOutput:
    """Reframe one argument under the configured variant.

    ``spans`` mark what to rewrite and are demarcated in the source when
    ``cfg.use_demarcators``; the control code is always prepended. With
    entailment enabled the reranked best candidate wins, otherwise the first
    candidate of the smallest k.
    """
    text = record.text
    if cfg.use_demarcators:
        if spans is None:
            raise ValueError("spans are required when demarcators are enabled")
        source = build_inference_source(text, spans, cfg.control_code)
    else:
        source = build_inference_source(text, [], cfg.control_code)

    candidates = generate_candidates(source, gen, sweep)
    if cfg.use_entailment:
        if scorer is None:
            raise ValueError("entailment reranking needs a scorer")
        best, ranked = rerank(text, candidates, scorer, cfg.nli_direction)
        return ReframeOutput(text=best.text, candidates=tuple(ranked), config=cfg)

    best = min(candidates, key=lambda c: c.k)
    return ReframeOutput(text=best.text, candidates=tuple(candidates), config=cfg)
