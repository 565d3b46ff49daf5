"""Serialization between rewrite results and the training/inference text format.

A training source line looks like::

    anticipation [DELIM] trust we need to [SEP] plan [SEP] for [SEP] your [SEP] threats

Control codes (the emotion labels of the words that were replaced) come
first, joined by ``[DELIM]``; each replaced word in the sentence body is
wrapped in a pair of ``[SEP]`` demarcators. The paired target is the plain
original sentence. Everything is single-space normalized, so the format
round-trips exactly: ``parse_source`` inverts ``serialize_pair`` and
``read_tsv`` inverts ``write_tsv``.

One ambiguity is inherent to the format: a source with no markers whose text
begins with a bare emotion word ("trust the process") reads that word as a
control code. Pipeline sources always carry at least one explicit code or
marker, so this only affects hand-written input.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .lexicon import ALL_LABELS, TokenSpan, ordered_labels

DELIM = "[DELIM]"
SEP = "[SEP]"
_MARKERS = (DELIM, SEP)


def normalize_space(text: str) -> str:
    """Collapse all whitespace runs (tabs and newlines included) to one space."""
    return " ".join(text.split())


@dataclass(frozen=True)
class TrainingPair:
    """One serialized (source, target) line plus its parsed structure."""

    source: str
    target: str
    control_codes: tuple
    span_count: int

    def __post_init__(self):
        for marker in _MARKERS:
            if marker in self.target:
                raise ValueError(f"target must not contain {marker}")
        sep_tokens = self.source.split().count(SEP)
        if sep_tokens != 2 * self.span_count:
            raise ValueError(
                f"source has {sep_tokens} {SEP} tokens, expected {2 * self.span_count}"
            )
        if bool(self.control_codes) != (self.span_count >= 1):
            raise ValueError("control codes must be present exactly when spans are")


def _spliced_with_positions(original: str, replacements) -> tuple[str, list]:
    """Apply replacements left to right; also return each one's span in the result."""
    parts = []
    positions = []
    cursor = 0
    out_len = 0
    for rep in replacements:
        span = rep.span
        if span.start_char < cursor:
            raise ValueError("replacement spans overlap or are out of order")
        gap = original[cursor : span.start_char]
        parts.append(gap)
        out_len += len(gap)
        positions.append((out_len, out_len + len(rep.replacement)))
        parts.append(rep.replacement)
        out_len += len(rep.replacement)
        cursor = span.end_char
    parts.append(original[cursor:])
    return "".join(parts), positions


def serialize_pair(result) -> TrainingPair:
    """Serialize a rewrite result into a training pair.

    Control codes are the union of the replaced words' original emotion sets,
    flattened in first-occurrence order (canonical order within one set) and
    deduplicated. The rewritten sentence becomes the source with every
    replacement wrapped in demarcators; the original sentence is the target.
    """
    codes: list = []
    seen = set()
    for rep in result.replacements:
        for label in ordered_labels(rep.original_emotions):
            if label not in seen:
                seen.add(label)
                codes.append(label)

    rebuilt, positions = _spliced_with_positions(result.original, result.replacements)
    if rebuilt != result.rewritten:
        raise ValueError("replacements do not reproduce the rewritten sentence")

    body_parts = []
    cursor = 0
    for start, end in positions:
        body_parts.append(rebuilt[cursor:start])
        body_parts.append(f" {SEP} {rebuilt[start:end]} {SEP} ")
        cursor = end
    body_parts.append(rebuilt[cursor:])
    body = "".join(body_parts)

    if codes:
        source = normalize_space(f"{f' {DELIM} '.join(codes)} {body}")
    else:
        source = normalize_space(body)
    return TrainingPair(
        source=source,
        target=normalize_space(result.original),
        control_codes=tuple(codes),
        span_count=len(result.replacements),
    )


def parse_source(source: str) -> tuple[list, str, list]:
    """Invert the source format: ``(codes, plain_text, spans)``.

    ``spans`` are indexed against ``plain_text`` (markers removed,
    single-space normalized). Raises DataError on an odd demarcator count, an
    unknown control code, or a stray ``[DELIM]`` in the body.
    """
    tokens = source.split()
    codes: list = []
    i = 0
    if i < len(tokens) and tokens[i] in ALL_LABELS:
        codes.append(tokens[i])
        i += 1
        while i + 1 < len(tokens) and tokens[i] == DELIM:
            candidate = tokens[i + 1]
            if candidate not in ALL_LABELS:
                raise DataError(f"unknown control code {candidate!r} after {DELIM}")
            codes.append(candidate)
            i += 2

    body = tokens[i:]
    if DELIM in body:
        raise DataError(f"stray {DELIM} in source body")
    if body.count(SEP) % 2 != 0:
        raise DataError(f"odd {SEP} count in source")

    plain_tokens: list = []
    spans: list = []
    in_span = False
    span_token_start = 0
    for tok in body:
        if tok == SEP:
            if not in_span:
                in_span = True
                span_token_start = len(plain_tokens)
            else:
                if len(plain_tokens) == span_token_start:
                    raise DataError(f"empty {SEP} span in source")
                spans.append((span_token_start, len(plain_tokens)))
                in_span = False
        else:
            plain_tokens.append(tok)

    plain_text = " ".join(plain_tokens)
    # Char offsets follow from the tokens' cumulative lengths after joining.
    offsets = []
    pos = 0
    for tok in plain_tokens:
        offsets.append((pos, pos + len(tok)))
        pos += len(tok) + 1
    token_spans = [
        TokenSpan(
            start_char=offsets[ts][0],
            end_char=offsets[te - 1][1],
            token_start=ts,
            token_end=te,
            surface=plain_text[offsets[ts][0] : offsets[te - 1][1]],
        )
        for ts, te in spans
    ]
    return codes, plain_text, token_spans


def build_inference_source(text: str, spans, code: str) -> str:
    """Assemble an inference source: one control code plus demarcated spans."""
    if code not in ALL_LABELS:
        raise ValueError(f"unknown control code {code!r}")
    ordered = sorted(spans, key=lambda s: s.start_char)
    cursor = 0
    for span in ordered:
        span.validate_against(text)
        if span.start_char < cursor:
            raise ValueError("overlapping spans")
        cursor = span.end_char
    parts = []
    cursor = 0
    for span in ordered:
        parts.append(text[cursor : span.start_char])
        parts.append(f" {SEP} {span.surface} {SEP} ")
        cursor = span.end_char
    parts.append(text[cursor:])
    return normalize_space(f"{code} {''.join(parts)}")


def write_tsv(pairs, path) -> None:
    """Write pairs as ``source<TAB>target`` lines, UTF-8 with LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, pair in enumerate(pairs):
            for name, value in (("source", pair.source), ("target", pair.target)):
                if "\t" in value or "\n" in value:
                    raise DataError(f"pair {i}: {name} contains tab/newline; normalize first")
            fh.write(f"{pair.source}\t{pair.target}\n")


def read_tsv(path) -> list[TrainingPair]:
    """Read pairs back; codes and span counts are recovered from each source."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 2:
                raise DataError(f"{path}: line {lineno}: expected exactly one tab")
            source, target = cells
            try:
                codes, _, spans = parse_source(source)
                pair = TrainingPair(
                    source=source,
                    target=target,
                    control_codes=tuple(codes),
                    span_count=len(spans),
                )
            except (DataError, ValueError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
            pairs.append(pair)
    return pairs
