"""Connotation and emotion lexicons, plus span finders over raw sentences.

Three word-level resources drive the pipeline:

* a connotation lexicon (CSV ``word,emotions``) mapping word forms to sets of
  emotional associations such as ``fear`` or ``trust``;
* an emotion association table (TSV ``word<TAB>emotion<TAB>flag``, the usual
  crowd-sourced word/emotion layout) used to locate fear-bearing words;
* a collocation list (one lowercase phrase per line) of politically skewed
  multi-word expressions.

All matching is lowercase exact-match over a simple wordlike tokenization.
There is no lemmatization or POS disambiguation, so results are fully
reproducible from the resource files alone. Emotion sets are plain
``frozenset`` objects of label strings; a word absent from a lexicon is
emotionally ``neutral`` by definition.

Loaded lexicons are immutable and safe to share across worker threads; every
function in this module is pure.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field

from .errors import DataError

# Canonical label order; ``neutral`` marks the absence of any association and
# never co-occurs with another label in one set.
EMOTIONS = (
    "anticipation",
    "anger",
    "fear",
    "joy",
    "trust",
    "sadness",
    "disgust",
    "surprise",
)
NEUTRAL = "neutral"
ALL_LABELS = frozenset(EMOTIONS) | {NEUTRAL}
NEUTRAL_SET = frozenset({NEUTRAL})

_LABEL_RANK = {label: i for i, label in enumerate(EMOTIONS + (NEUTRAL,))}

# Wordlike tokens: alphanumeric runs with internal apostrophes ("america's"
# stays one token). Underscores and all other punctuation separate tokens.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")

EmotionSet = frozenset


def validate_emotion_set(labels) -> frozenset:
    """Return ``labels`` as a valid frozenset of emotion labels.

    Raises ValueError on unknown labels, an empty set, or ``neutral`` mixed
    with other labels.
    """
    out = frozenset(labels)
    if not out:
        raise ValueError("emotion set must be non-empty")
    for label in out:
        if label not in ALL_LABELS:
            raise ValueError(f"unknown emotion label {label!r}")
    if NEUTRAL in out and out != NEUTRAL_SET:
        raise ValueError("neutral cannot be combined with other labels")
    return out


def ordered_labels(labels) -> tuple:
    """Labels of an emotion set in canonical order (stable for display)."""
    return tuple(sorted(labels, key=_LABEL_RANK.__getitem__))


def has_different_connotation(a: frozenset, b: frozenset) -> bool:
    """True iff the two emotion sets differ (set inequality, not disjointness)."""
    return frozenset(a) != frozenset(b)


@dataclass(frozen=True)
class TokenSpan:
    """A contiguous token range with both character and token coordinates."""

    start_char: int
    end_char: int
    token_start: int
    token_end: int  # exclusive
    surface: str

    def __post_init__(self):
        if not (0 <= self.start_char < self.end_char):
            raise ValueError(f"invalid char range [{self.start_char}, {self.end_char})")
        if not (0 <= self.token_start < self.token_end):
            raise ValueError(f"invalid token range [{self.token_start}, {self.token_end})")

    def validate_against(self, text: str) -> None:
        if self.end_char > len(text):
            raise ValueError("span exceeds text length")
        if text[self.start_char : self.end_char] != self.surface:
            raise ValueError(
                f"surface {self.surface!r} does not match text slice "
                f"{text[self.start_char:self.end_char]!r}"
            )


def tokenize(text: str) -> list[TokenSpan]:
    """Split ``text`` into wordlike tokens, each as a single-token span."""
    return [
        TokenSpan(m.start(), m.end(), i, i + 1, m.group())
        for i, m in enumerate(_TOKEN_RE.finditer(text))
    ]


def merge_tokens(text: str, tokens: list[TokenSpan], i: int, j: int) -> TokenSpan:
    """Span covering tokens ``i..j-1`` of ``tokens`` (offsets into ``text``)."""
    start = tokens[i].start_char
    end = tokens[j - 1].end_char
    return TokenSpan(start, end, i, j, text[start:end])


@dataclass(frozen=True)
class ConnotationLexicon:
    """Word -> emotion set mapping loaded from the connotation CSV."""

    entries: dict
    source_path: str = ""
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EmotionLexicon:
    """Word -> emotion set mapping folded from binary association rows."""

    entries: dict
    source_path: str = ""
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CollocationList:
    """Lowercased multi-word phrases, stored token-normalized."""

    phrases: frozenset
    max_len: int
    source_path: str = ""


@dataclass(frozen=True)
class Lexicons:
    """Bundle of the three resources as consumed by the pipeline stages."""

    connotation: ConnotationLexicon | None = None
    emotion: EmotionLexicon | None = None
    collocations: CollocationList | None = None


def _merge_sets(old: frozenset, new: frozenset) -> frozenset:
    # Union of duplicate rows; neutral is absorbed by any real association.
    merged = old | new
    if len(merged) > 1:
        merged -= NEUTRAL_SET
    return merged


def load_connotation_lexicon(path) -> ConnotationLexicon:
    """Load the connotation CSV (header ``word,emotions``, ``;``-joined labels).

    Duplicate words keep the union of their emotion sets. Rows whose word is
    not a single token are skipped and counted in ``stats["multi_token_rows"]``.
    """
    entries: dict = {}
    stats = {"rows": 0, "duplicates": 0, "multi_token_rows": 0}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty lexicon") from None
        if [h.strip().lower() for h in header] != ["word", "emotions"]:
            raise DataError(f"{path}: expected header 'word,emotions', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataError(f"{path}: malformed row at line {lineno}: {row!r}")
            word = row[0].strip().lower()
            if not word:
                raise DataError(f"{path}: empty word at line {lineno}")
            if len(word.split()) > 1:
                stats["multi_token_rows"] += 1
                continue
            labels = [p.strip() for p in row[1].split(";") if p.strip()]
            if not labels:
                raise DataError(f"{path}: malformed row at line {lineno}: no emotions")
            try:
                emotion_set = validate_emotion_set(labels)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
            stats["rows"] += 1
            if word in entries:
                stats["duplicates"] += 1
                entries[word] = _merge_sets(entries[word], emotion_set)
            else:
                entries[word] = emotion_set
    if not entries:
        raise DataError(f"{path}: empty lexicon")
    return ConnotationLexicon(entries=entries, source_path=str(path), stats=stats)


# Sentiment polarity rows found in the standard association file layout; they
# are not emotions and are skipped (counted) rather than rejected.
_POLARITY_ROWS = {"positive", "negative"}


def load_emotion_lexicon(path) -> EmotionLexicon:
    """Load the emotion association TSV; flag ``1`` adds set membership."""
    entries: dict = {}
    stats = {"rows": 0, "polarity_rows_skipped": 0, "multi_token_rows": 0}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: malformed row at line {lineno}: {line!r}")
            word, emotion, flag = (p.strip() for p in parts)
            word = word.lower()
            emotion = emotion.lower()
            if emotion in _POLARITY_ROWS:
                stats["polarity_rows_skipped"] += 1
                continue
            if emotion not in ALL_LABELS or emotion == NEUTRAL:
                raise DataError(f"{path}: line {lineno}: unknown emotion label {emotion!r}")
            if flag not in ("0", "1"):
                raise DataError(f"{path}: line {lineno}: flag must be 0 or 1, got {flag!r}")
            if len(word.split()) > 1:
                stats["multi_token_rows"] += 1
                continue
            stats["rows"] += 1
            if flag == "1":
                current = entries.get(word, frozenset())
                entries[word] = current | {emotion}
    if not entries:
        raise DataError(f"{path}: empty lexicon")
    return EmotionLexicon(entries=entries, source_path=str(path), stats=stats)


def load_collocations(path) -> CollocationList:
    """Load the phrase list: one phrase per line, ``#`` comments ignored."""
    phrases = set()
    max_len = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = [t.surface.lower() for t in tokenize(line)]
            if not tokens:
                raise DataError(f"{path}: phrase {line!r} has no tokens")
            phrases.add(" ".join(tokens))
            max_len = max(max_len, len(tokens))
    return CollocationList(phrases=frozenset(phrases), max_len=max_len, source_path=str(path))


def lookup(lex, token: str) -> frozenset:
    """Emotion set of ``token`` (case-insensitive); absent words are neutral."""
    if not token or not token.strip():
        raise ValueError("token must be non-empty")
    return lex.entries.get(token.strip().lower(), NEUTRAL_SET)


def find_emotion_words(text: str, lex: EmotionLexicon, target: str) -> list[TokenSpan]:
    """Spans of tokens whose emotion set contains ``target``, left to right."""
    if target == NEUTRAL:
        raise ValueError("target emotion must not be neutral")
    if target not in ALL_LABELS:
        raise ValueError(f"unknown emotion label {target!r}")
    return [
        tok
        for tok in tokenize(text)
        if target in lex.entries.get(tok.surface.lower(), NEUTRAL_SET)
    ]


def find_collocations(text: str, coll: CollocationList) -> list[TokenSpan]:
    """Greedy leftmost-longest phrase matches over lowercased tokens.

    Returned spans never overlap and are sorted by start offset.
    """
    tokens = tokenize(text)
    lowered = [t.surface.lower() for t in tokens]
    spans = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = 0
        for length in range(min(coll.max_len, n - i), 0, -1):
            if " ".join(lowered[i : i + length]) in coll.phrases:
                matched = length
                break
        if matched:
            spans.append(merge_tokens(text, tokens, i, i + matched))
            i += matched
        else:
            i += 1
    return spans
