"""Connotation-guided masked rewriting.

Candidate words (anything with a non-neutral connotation) are masked one at a
time, left to right, and re-infilled by a masked language model under a
connotation constraint:

* DIFFERENT mode keeps the best-scored prediction whose emotion set differs
  from the original word's — this builds parallel training data where the
  rewritten side carries a different connotation than the target side;
* PREFER(e) mode keeps the best prediction whose emotion set contains ``e``
  and falls back to the best unconstrained prediction when none does — the
  lexical-replacement baseline at test time.

Each mask is applied against the partially rewritten sentence, so later
predictions see earlier substitutions in context. Recorded replacement spans
stay in the coordinates of the original sentence; splicing them back in
reproduces the rewritten sentence exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .backends import MASK_TOKEN, MaskedInfiller
from .lexicon import (
    NEUTRAL,
    NEUTRAL_SET,
    ConnotationLexicon,
    TokenSpan,
    has_different_connotation,
    lookup,
    tokenize,
    validate_emotion_set,
)


@dataclass(frozen=True)
class RewriteMode:
    kind: str  # "different" | "prefer"
    target: str | None = None

    def __post_init__(self):
        if self.kind not in ("different", "prefer"):
            raise ValueError(f"unknown rewrite mode {self.kind!r}")
        if self.kind == "prefer":
            if self.target is None or self.target == NEUTRAL:
                raise ValueError("prefer mode needs a non-neutral target emotion")
            validate_emotion_set({self.target})
        elif self.target is not None:
            raise ValueError("different mode takes no target")


DIFFERENT = RewriteMode("different")


def prefer(target: str) -> RewriteMode:
    return RewriteMode("prefer", target)


@dataclass(frozen=True)
class Replacement:
    """One accepted substitution, with span offsets into the original text."""

    span: TokenSpan
    original: str
    replacement: str
    original_emotions: frozenset
    replacement_emotions: frozenset

    def __post_init__(self):
        if self.replacement.casefold() == self.original.casefold():
            raise ValueError("replacement must differ from the original word")


@dataclass(frozen=True)
class RewriteResult:
    original: str
    rewritten: str
    replacements: tuple = ()


@dataclass
class RewriteOptions:
    top_n: int = 20  # infiller candidates considered per mask
    max_spans: int | None = None


@dataclass
class RewriteStats:
    """Counters for the parallel-data stats sidecar."""

    candidates: int = 0
    accepted: int = 0
    skipped: int = 0
    fallback_used: int = 0
    infiller_failures: int = 0

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def select_candidates(
    text: str, lex: ConnotationLexicon, max_spans: int | None = None
) -> list[TokenSpan]:
    """Token spans carrying a non-neutral connotation, left to right."""
    spans = [
        tok for tok in tokenize(text) if lookup(lex, tok.surface) != NEUTRAL_SET
    ]
    if max_spans is not None:
        spans = spans[:max_spans]
    return spans


def _surviving_candidates(predictions, original: str):
    # Drop the original itself, punctuation, and sub-token fragments.
    for token, score in predictions:
        token = token.strip()
        if not token or not token[0].isalpha():
            continue
        if token.casefold() == original.casefold():
            continue
        yield token, score


def infill(
    text: str,
    span: TokenSpan,
    mode: RewriteMode,
    infiller: MaskedInfiller,
    lex: ConnotationLexicon,
    top_n: int = 20,
    stats: RewriteStats | None = None,
) -> Replacement | None:
    """Mask ``span`` in ``text`` and pick a constrained replacement, if any."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    span.validate_against(text)
    masked = f"{text[:span.start_char]}{MASK_TOKEN}{text[span.end_char:]}"
    try:
        predictions = infiller.predict(masked, top_n)
    except Exception:
        if stats is not None:
            stats.infiller_failures += 1
        return None

    original_emotions = lookup(lex, span.surface)
    survivors = list(_surviving_candidates(predictions, span.surface))

    chosen = None
    fallback = False
    if mode.kind == "different":
        for token, _ in survivors:
            if has_different_connotation(lookup(lex, token), original_emotions):
                chosen = token
                break
    else:
        for token, _ in survivors:
            if mode.target in lookup(lex, token):
                chosen = token
                break
        if chosen is None and survivors:
            chosen = survivors[0][0]
            fallback = True

    if chosen is None:
        return None
    if stats is not None and fallback:
        stats.fallback_used += 1
    return Replacement(
        span=span,
        original=span.surface,
        replacement=chosen,
        original_emotions=original_emotions,
        replacement_emotions=lookup(lex, chosen),
    )


def apply_replacements(original: str, replacements) -> str:
    """Splice replacement words into the original text (spans must be sorted)."""
    parts = []
    cursor = 0
    for rep in replacements:
        if rep.span.start_char < cursor:
            raise ValueError("replacement spans overlap or are out of order")
        parts.append(original[cursor : rep.span.start_char])
        parts.append(rep.replacement)
        cursor = rep.span.end_char
    parts.append(original[cursor:])
    return "".join(parts)


def rewrite_sentence(
    text: str,
    mode: RewriteMode,
    infiller: MaskedInfiller,
    lex: ConnotationLexicon,
    options: RewriteOptions | None = None,
    stats: RewriteStats | None = None,
) -> RewriteResult:
    """Rewrite every candidate word in ``text`` under the mode's constraint.

    Candidates are fixed up front on the original text; masking then proceeds
    left to right against the partially rewritten sentence. Spans that yield
    no acceptable replacement are left unchanged.
    """
    options = options or RewriteOptions()
    spans = select_candidates(text, lex, options.max_spans)
    if stats is not None:
        stats.candidates += len(spans)

    current = text
    delta = 0
    accepted: list[Replacement] = []
    for span in spans:
        shifted = TokenSpan(
            start_char=span.start_char + delta,
            end_char=span.end_char + delta,
            token_start=span.token_start,
            token_end=span.token_end,
            surface=span.surface,
        )
        rep = infill(current, shifted, mode, infiller, lex, options.top_n, stats)
        if rep is None:
            if stats is not None:
                stats.skipped += 1
            continue
        current = (
            current[: shifted.start_char] + rep.replacement + current[shifted.end_char :]
        )
        delta += len(rep.replacement) - len(span.surface)
        accepted.append(dataclasses.replace(rep, span=span))
        if stats is not None:
            stats.accepted += 1

    return RewriteResult(original=text, rewritten=current, replacements=tuple(accepted))


def lexrep_reframe(
    text: str,
    target_spans,
    infiller: MaskedInfiller,
    lex: ConnotationLexicon,
    target: str = "trust",
    top_n: int = 20,
    stats: RewriteStats | None = None,
) -> str:
    """Lexical-replacement baseline: PREFER-mode infilling of the given spans.

    Multi-token spans (collocations) are masked as a single unit and replaced
    by the top surviving candidate phrase. Spans with no surviving candidate
    are left unchanged; text outside the spans is never touched.
    """
    mode = prefer(target)
    ordered = sorted(target_spans, key=lambda s: s.start_char)
    cursor = 0
    for span in ordered:
        span.validate_against(text)
        if span.start_char < cursor:
            raise ValueError("target spans overlap")
        cursor = span.end_char

    current = text
    delta = 0
    for span in ordered:
        shifted = TokenSpan(
            start_char=span.start_char + delta,
            end_char=span.end_char + delta,
            token_start=span.token_start,
            token_end=span.token_end,
            surface=span.surface,
        )
        rep = infill(current, shifted, mode, infiller, lex, top_n, stats)
        if rep is None:
            if stats is not None:
                stats.skipped += 1
            continue
        current = (
            current[: shifted.start_char] + rep.replacement + current[shifted.end_char :]
        )
        delta += len(rep.replacement) - len(span.surface)
        if stats is not None:
            stats.accepted += 1
    return current
