"""Pluggable model interfaces and their deterministic mock implementations.

Five interfaces cover every learned component the pipeline touches: masked
infilling, sequence-to-sequence generation, entailment scoring, sentence
encoding, and claim/premise classification. The mocks here are table-driven
and bitwise deterministic, so the whole pipeline runs (and is tested) without
any pretrained weights. Real-model adapters live in :mod:`lexframe.adapters`
behind the same interfaces and are loaded lazily via ``model:<identifier>``
config values.

Implementations declare ``reentrant``; when False the pipeline instantiates
one copy per worker. All mocks are reentrant.

Mock fixture files (all JSON, referenced as ``mock:<path>``):

* infiller: ``{"<sentence with [MASK]>": [["token", score], ...], ...}``
* generator: ``{"rules": [{"source": .., "k"?: .., "output": ..} |
  {"contains": .., "output": ..}, ...]}`` — first match wins, otherwise the
  generator echoes the source body with codes and demarcators stripped
* scorer: ``{"rows": [{"premise": .., "hypothesis": ..,
  "scores": [e, n, c]}, ...]}`` — unknown pairs score uniform (1/3, 1/3, 1/3)
* classifier: ``{"labels": {"<text>": "<label>"}}`` — unlisted texts fall back
  to the discourse-marker rule stub
* encoder: ``mock:<dim>`` selects the hashing encoder dimension (default 256)
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod

import numpy as np

from .errors import BackendError, ConfigError, DataError
from .pairformat import DELIM, SEP, parse_source

MASK_TOKEN = "[MASK]"

ARGUMENT_LABELS = ("claim", "premise", "non_argument")

_SIMPLEX_TOL = 1e-6


def stable_u64(*parts) -> int:
    """Process-independent 64-bit hash of the stringified parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class MaskedInfiller(ABC):
    """Predicts replacements for the single ``[MASK]`` token in a sentence."""

    reentrant = True

    @abstractmethod
    def predict(self, text_with_mask: str, top_n: int) -> list[tuple[str, float]]:
        """Ranked ``(token, score)`` candidates, best first, at most ``top_n``."""


class Seq2SeqGenerator(ABC):
    """Sequence-to-sequence backbone: fine-tuning plus top-k sampling."""

    reentrant = True

    @abstractmethod
    def fine_tune(self, train_pairs, val_pairs, config: dict) -> dict:
        """Train on (source, target) pairs; return a handle mapping.

        The handle records ``pair_count`` and, for ``config["epochs"]`` epochs,
        ``epoch_metrics``: a list of ``{"epoch": i, "val_perplexity": x}`` rows
        computed on ``val_pairs``.
        """

    @abstractmethod
    def sample(self, source: str, k: int, seed: int, max_len: int) -> str:
        """One top-k sample; deterministic for fixed ``(source, k, seed)``."""


class EntailmentScorer(ABC):
    """Probabilities over (entailment, neutral, contradiction) for a pair."""

    reentrant = True

    def score(self, premise: str, hypothesis: str) -> tuple[float, float, float]:
        probs = tuple(float(p) for p in self._score(premise, hypothesis))
        if len(probs) != 3 or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > _SIMPLEX_TOL:
            raise BackendError(f"scorer returned invalid probabilities {probs!r}")
        return probs

    @abstractmethod
    def _score(self, premise: str, hypothesis: str):
        ...


class SentenceEncoder(ABC):
    """Fixed-dimension sentence embeddings; deterministic per instance."""

    reentrant = True
    dim: int

    @abstractmethod
    def encode(self, text: str) -> np.ndarray:
        ...


class ArgumentClassifier(ABC):
    """Labels a sentence as claim, premise, or non_argument."""

    reentrant = True

    @abstractmethod
    def classify(self, text: str) -> str:
        ...


class MockInfiller(MaskedInfiller):
    def __init__(self, table: dict):
        self.table = {
            key: sorted(((str(t), float(s)) for t, s in row), key=lambda ts: -ts[1])
            for key, row in table.items()
        }
        for key, row in self.table.items():
            if any(not np.isfinite(s) for _, s in row):
                raise ValueError(f"non-finite score in infiller row {key!r}")

    def predict(self, text_with_mask, top_n):
        if top_n <= 0:
            return []
        return list(self.table.get(text_with_mask, ()))[:top_n]


def _strip_markers(source: str) -> str:
    # Echo behaviour: recover the plain body from a pipeline-built source.
    try:
        _, plain, _ = parse_source(source)
        return plain
    except DataError:
        tokens = [t for t in source.split() if t not in (SEP, DELIM)]
        return " ".join(tokens)


class MockGenerator(Seq2SeqGenerator):
    """Rule-table generator; unmatched sources echo their body."""

    def __init__(self, rules=()):
        self.rules = list(rules)
        for rule in self.rules:
            if "output" not in rule or not ({"source", "contains"} & rule.keys()):
                raise ValueError(f"bad generator rule {rule!r}")
        self.fine_tune_calls: list = []

    def fine_tune(self, train_pairs, val_pairs, config):
        train_pairs = list(train_pairs)
        val_pairs = list(val_pairs)
        epochs = int(config.get("epochs", 1))
        seed = int(config.get("seed", 0))
        metrics = []
        for epoch in range(1, epochs + 1):
            noise = stable_u64("ppl", seed, epoch, len(train_pairs), len(val_pairs))
            metrics.append(
                {"epoch": epoch, "val_perplexity": 8.0 + (noise % 4000) / 1000.0}
            )
        handle = {"pair_count": len(train_pairs), "epoch_metrics": metrics}
        self.fine_tune_calls.append(handle)
        return handle

    def sample(self, source, k, seed, max_len):
        out = None
        for rule in self.rules:
            if "source" in rule:
                if rule["source"] != source:
                    continue
                if "k" in rule and int(rule["k"]) != k:
                    continue
            elif rule["contains"] not in source:
                continue
            out = rule["output"]
            break
        if out is None:
            out = _strip_markers(source)
        words = out.split()
        if len(words) > max_len:
            out = " ".join(words[:max_len])
        return out


class MockEntailmentScorer(EntailmentScorer):
    def __init__(self, table: dict | None = None):
        self.table = {}
        for key, probs in (table or {}).items():
            probs = tuple(float(p) for p in probs)
            if len(probs) != 3 or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > _SIMPLEX_TOL:
                raise ValueError(f"scores for {key!r} are not a probability simplex: {probs!r}")
            self.table[key] = probs

    def _score(self, premise, hypothesis):
        return self.table.get((premise, hypothesis), (1 / 3, 1 / 3, 1 / 3))


class HashEncoder(SentenceEncoder):
    """Bag-of-tokens embedding via stable hashing; no weights involved."""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ValueError("encoder dimension must be >= 8")
        self.dim = int(dim)

    def bucket(self, token: str) -> int:
        return stable_u64("bucket", token.lower()) % self.dim

    def encode(self, text):
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in text.split():
            vec[self.bucket(token)] += 1.0
        return vec


_INTERROGATIVES = {
    "is", "are", "was", "were", "do", "does", "did", "can", "could",
    "will", "would", "should", "who", "what", "when", "where", "why",
    "how", "which",
}
_PREMISE_MARKERS = ("because", "since", "therefore", "hence", "thus", "as a result")


class RuleArgumentClassifier(ArgumentClassifier):
    """Deterministic discourse-marker stub used wherever no model is wired in."""

    def classify(self, text):
        stripped = text.strip()
        if not stripped:
            raise ValueError("text must be non-empty")
        lowered = stripped.lower()
        first = lowered.split()[0]
        if lowered.endswith("?") or first in _INTERROGATIVES:
            return "non_argument"
        padded = f" {lowered} "
        if any(f" {marker} " in padded for marker in _PREMISE_MARKERS):
            return "premise"
        return "claim"


class MockArgumentClassifier(ArgumentClassifier):
    """Lookup-table classifier with the rule stub as fallback."""

    def __init__(self, labels: dict):
        for text, label in labels.items():
            if label not in ARGUMENT_LABELS:
                raise ValueError(f"unknown label {label!r} for {text!r}")
        self.labels = dict(labels)
        self._fallback = RuleArgumentClassifier()

    def classify(self, text):
        return self.labels.get(text, self._fallback.classify(text))


def mock_infiller(table: dict) -> MaskedInfiller:
    return MockInfiller(table)


def mock_generator(rules=()) -> Seq2SeqGenerator:
    return MockGenerator(rules)


def mock_scorer(table: dict | None = None) -> EntailmentScorer:
    return MockEntailmentScorer(table)


def hash_encoder(dim: int = 256) -> SentenceEncoder:
    return HashEncoder(dim)


BACKEND_KINDS = ("infiller", "generator", "scorer", "encoder", "classifier")


def _load_fixture(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read backend fixture {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"backend fixture {path} is not valid JSON: {exc}") from None


def load_backend(kind: str, value: str, base_dir=None):
    """Instantiate a backend from a ``mock:<fixture>`` / ``model:<id>`` value.

    Relative fixture paths resolve against ``base_dir`` (normally the config
    file's directory). An empty fixture path selects the parameterless mock:
    empty infiller table, echo generator, uniform scorer, 256-dim hashing
    encoder, rule-stub classifier.
    """
    if kind not in BACKEND_KINDS:
        raise ConfigError(f"unknown backend kind {kind!r}")
    scheme, _, rest = value.partition(":")
    if scheme == "model":
        from . import adapters

        return adapters.load_model_backend(kind, rest)
    if scheme != "mock":
        raise ConfigError(f"backend value must start with 'mock:' or 'model:', got {value!r}")

    if kind == "encoder":
        if not rest:
            return HashEncoder()
        try:
            return HashEncoder(int(rest))
        except ValueError as exc:
            raise ConfigError(f"bad encoder dimension {rest!r}: {exc}") from None

    if not rest:
        return {
            "infiller": lambda: MockInfiller({}),
            "generator": lambda: MockGenerator(),
            "scorer": lambda: MockEntailmentScorer(),
            "classifier": lambda: RuleArgumentClassifier(),
        }[kind]()

    path = rest
    if base_dir is not None:
        import os

        path = os.path.join(base_dir, rest) if not os.path.isabs(rest) else rest
    data = _load_fixture(path)
    try:
        if kind == "infiller":
            return MockInfiller(data)
        if kind == "generator":
            return MockGenerator(data.get("rules", []))
        if kind == "scorer":
            table = {
                (row["premise"], row["hypothesis"]): tuple(row["scores"])
                for row in data.get("rows", [])
            }
            return MockEntailmentScorer(table)
        return MockArgumentClassifier(data.get("labels", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} fixture {path}: {exc}") from None
