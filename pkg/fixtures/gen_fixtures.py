#!/usr/bin/env python3
"""Regenerate the bundled fixture files in this directory.

Everything here is self-contained on purpose: the script re-derives the
masked-infilling keys by simulating the left-to-right replacement walk
directly, so the fixtures never depend on the package implementation they are
used to test. Run from anywhere; files are written next to this script.
"""

import json
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent

TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
MASK = "[MASK]"
NEUTRAL = frozenset({"neutral"})

# word -> emotion set (connotation.csv). Keep every entry single-token; the
# one multi-token row below is there to exercise the loader's skip counter.
CONNOTATION = {
    "resources": "joy;trust",
    "defense": "anticipation;anger;fear",
    "prepare": "anticipation",
    "real": "trust",
    "threat": "fear;anger",
    "danger": "fear;anger",
    "dangerous": "fear",
    "weapons": "fear;anger",
    "crisis": "fear;sadness",
    "security": "trust;joy",
    "protect": "trust",
    "support": "trust;joy",
    "freedom": "joy;trust",
    "victory": "joy;anticipation",
    "collapse": "fear;sadness",
    "failure": "sadness",
    "hope": "anticipation;joy",
    "promise": "anticipation;trust",
    "destroy": "fear;anger",
    "corrupt": "disgust;anger",
    "scandal": "disgust;surprise",
    "reform": "anticipation;trust",
    "benefit": "joy",
    "risk": "fear;anticipation",
    "attack": "fear;anger",
    "enemy": "fear;anger;disgust",
    "betrayal": "anger;sadness;disgust",
    "panic": "fear",
    "chaos": "fear;surprise",
    "prosperity": "joy;anticipation",
    "alarm": "fear;surprise",
    "warning": "fear;anticipation",
    "safeguard": "trust",
    "challenge": "anticipation",
    "decline": "sadness",
    "uncertainty": "fear;anticipation",
    "peace": "joy;trust",
    "stability": "trust",
    "fortune": "joy;anticipation",
}
EXTRA_CONNOTATION_ROWS = [
    ("benefit", "joy"),          # duplicate row: unions to the same set
    ("soft power", "trust"),     # multi-token: flagged and skipped at load
]

# Ranked infiller candidates per maskable word. Deliberate noise rows
# exercise the candidate filters: the original word itself, sub-token
# fragments, punctuation, and same-connotation predictions.
CANDIDATES = {
    "resources": [("resources", 0.93), ("tools", 0.91)],
    "defense": [("##ense", 0.95), ("safety", 0.88)],
    "prepare": [("plan", 0.91)],
    "real": [("your", 0.91)],
    "threat": [("danger", 0.93), ("challenge", 0.87)],
    "danger": [("threat", 0.90)],  # same set: DIFFERENT mode skips this span
    "weapons": [("tools", 0.84)],
    "crisis": [("situation", 0.90)],
    "dangerous": [("--", 0.99), ("difficult", 0.82)],
    "security": [("stability", 0.80), ("order", 0.74)],
    "protect": [("assist", 0.77)],
    "support": [("favor", 0.85)],
    "freedom": [("autonomy", 0.90)],
    "victory": [("result", 0.72)],
    "collapse": [("decline", 0.88)],
    "failure": [("shortfall", 0.66)],
    "hope": [("plan", 0.69)],
    "promise": [("pledge", 0.81)],
    "destroy": [("remove", 0.86)],
    "corrupt": [("flawed", 0.79)],
    "scandal": [("affair", 0.83)],
    "reform": [("change", 0.87)],
    "benefit": [("gain", 0.75)],
    "risk": [("chance", 0.89)],
    "attack": [("criticism", 0.71)],
    "enemy": [("rival", 0.82)],
    "betrayal": [("departure", 0.64)],
    "panic": [("concern", 0.78)],
    "chaos": [("disorder", 0.85)],
    "prosperity": [("growth", 0.80)],
    "alarm": [("notice", 0.70)],
    "warning": [("reminder", 0.76)],
    "safeguard": [("preserve", 0.73)],
    "challenge": [("task", 0.67)],
    "decline": [("dip", 0.62)],
    "uncertainty": [("ambiguity", 0.68)],
    "peace": [("calm", 0.77)],
    "stability": [("balance", 0.65)],
    "fortune": [("wealth", 0.70)],
}

PREMISES = [
    "we need to prepare for real threats to our defense because the region is unstable",
    "the city faced a crisis because the funding ran out",
    "people lost resources because the program was cut",
    "the plant is dangerous because the pipes keep leaking",
    "the deal was a betrayal because nobody was consulted",
    "the team earned a victory because the drills paid off",
    "the law will protect tenants because it limits fees",
    "markets saw panic because the report leaked early",
    "the merger was a failure because the models disagreed",
    "the coach sees promise because the squad is young",
    "voters demanded reform because the audits kept failing",
    "the firm took a risk because the margins looked thin",
    "the outage caused chaos because no backup existed",
    "the editorial was an attack because it named no sources",
    "the board fears collapse because the reserves are gone",
    "the village enjoyed prosperity because the harbor reopened",
    "the mayor promised security because the cameras were installed",
    "critics called him corrupt because the contracts were sealed",
    "the leak became a scandal because the memos were dated",
    "the union offered support because the demands were modest",
    "the treaty brought peace because both sides disarmed",
    "residents felt alarm because the sirens ran all night",
    "the agency issued a warning because the river kept rising",
    "the charter is a safeguard because it separates the powers",
    "the danger is obvious because the dam is cracking",
    "the danger grew because the weapons were left unguarded",
    "the committee praised the reform because the waitlists shrank",
    "the startup courted failure because the runway was short",
    "the senator invoked freedom because the bill curbed speech",
    "the court upheld the benefit because the statute was plain",
    "the family clung to hope because the search continued",
    "the regime tried to destroy dissent because the strikes spread",
    "the coalition treated him as an enemy because he broke ranks",
    "the downturn was a threat because the debt kept climbing",
    "the bank restored stability because the loans were refinanced",
    "the drought tested the village since the wells were shallow",
    "uncertainty stalled the project since the permits lagged",
    "the outage shook public trust therefore the audit was ordered",
    "the fund preserved its fortune because the managers hedged",
    "the challenge energized the lab because the prize was real",
    "the champions savored the victory since the title was overdue",
    "the inquiry exposed the scandal since the ledgers were public",
    "the embargo deepened the crisis since the ports stayed closed",
    "the alliance promised protection because the border was long",
]

DECOYS = [
    "is this the best policy for the region",
    "should we sign the accord this year",
    "what happens after the vote",
    "the committee will meet on monday",
    "the budget passed last week",
    "do the numbers support this conclusion",
]

NRC_ROWS = [
    ("dangerous", "fear", 1),
    ("dangerous", "anger", 0),
    ("folly", "fear", 1),
    ("threat", "fear", 1),
    ("suicidal", "fear", 1),
    ("panic", "fear", 1),
    ("collapse", "fear", 1),
    ("crisis", "fear", 1),
    ("terror", "fear", 1),
    ("terror", "negative", 1),
    ("alarm", "fear", 1),
    ("catastrophe", "fear", 1),
    ("menace", "fear", 1),
    ("danger", "fear", 1),
    ("calm", "fear", 0),
    ("victory", "joy", 1),
    ("hope", "positive", 1),
    ("hope", "anticipation", 1),
]

COLLOCATIONS = [
    "soft power",
    "power vacuum",
    "investment vehicles",
    "broken system",
    "territorial claims",
    "abortion providers",
    "marriage licenses",
    "targeted killing",
    "moral obligation",
    "leading experts",
    "military confrontation",
]

PARTISAN_TESTSET = [
    ("pt01", "I suppose you could argue that they are much better at soft power than their rivals, but come on", "soft power"),
    ("pt02", "it is hard to imagine a single act that would do more to restore our soft power than this treaty", "soft power"),
    ("pt03", "every nation with territorial claims in the region belongs to the alliance, except one", "territorial claims"),
    ("pt04", "the vote reveals a broken system and a democracy at risk of failure", "broken system"),
    ("pt05", "investors receive tax benefits through investment vehicles called qualified funds", "investment vehicles"),
]

FEAR_TESTSET = [
    ("ft01", "ignoring the reports would be a dangerous folly because the threat keeps growing",
     ["dangerous", "folly", "threat"]),
    ("ft02", "the markets slid into panic because the report left no room for doubt", ["panic"]),
    ("ft03", "the state faces collapse because the reserves are gone", ["collapse"]),
    ("ft04", "families fled the terror because the shelling continued", ["terror"]),
]

# PREFER-mode candidates for the test-set spans (lexical-replacement runs).
# pt05 has no entry at all: its span must pass through unchanged.
SPAN_CANDIDATES = {
    ("pt01", "soft power"): [("moral standing", 0.80), ("military strength", 0.60)],
    ("pt02", "soft power"): [("moral standing", 0.80), ("economic leverage", 0.50)],
    ("pt03", "territorial claims"): [("border disputes", 0.70), ("security", 0.60)],
    ("pt04", "broken system"): [("flawed process", 0.75)],
    ("ft01", "dangerous"): [("reckless", 0.80), ("serious", 0.70)],
    ("ft01", "folly"): [("mistake", 0.80)],
    ("ft01", "threat"): [("concern", 0.80)],
    ("ft02", "panic"): [("selling", 0.70)],
    ("ft03", "collapse"): [("insolvency", 0.60)],
    ("ft04", "terror"): [("violence", 0.70)],
}

# Rule outputs for the mock generator, keyed by test-set id. pt01 flips on k:
# the small-k sample contradicts the input and the NLI pass must reject it.
GENERATOR_OUTPUTS = {
    "pt01": {
        5: "I suppose you could argue that they are much better at military strength than their rivals, but come on",
        10: "I suppose you could argue that they are much better at diplomatic communication than their rivals, but come on",
    },
    "pt02": {None: "it is hard to imagine a single act that would do more to restore our diplomatic credibility than this treaty"},
    "pt03": {None: "every nation with boundary agreements in the region belongs to the alliance, except one"},
}

SCORER_ROWS = [
    ("pt01", 5, (0.20, 0.50, 0.30)),
    ("pt01", 10, (0.90, 0.08, 0.02)),
    ("pt02", None, (0.85, 0.10, 0.05)),
    ("pt03", None, (0.80, 0.15, 0.05)),
]

TOY_CONFIG = """\
# Desk-scale pipeline config: bundled fixtures, mock backends.
# Paths are relative to this file's directory.
connotation_lexicon = connotation.csv
emotion_lexicon = nrc_emotion.tsv
collocations = collocations.txt
corpus = toy_corpus.jsonl
out_dir = out
infiller = mock:infiller.json
generator = mock:generator.json
scorer = mock:scorer.json
encoder = mock:64
classifier = mock:
mode = different
top_n = 20
max_spans =
train_ratio = 0.9
epochs = 3
max_tokens_per_batch = 1024
k_values = 5,10,15,20,25,30,35,40,45,50
samples_per_k = 1
max_len = 64
use_demarcators = true
use_entailment = true
control_code = trust
nli_direction = fwd
checkpoint =
task = partisan
sample_size = 3
iterations = 2000
seed = 13
"""


def emotion_set(word):
    spec = CONNOTATION.get(word.lower())
    return frozenset(spec.split(";")) if spec else NEUTRAL


def different_mode_choice(word, candidates):
    """Best-ranked candidate that survives the filters and changes the set."""
    original = emotion_set(word)
    for cand, _ in sorted(candidates, key=lambda cs: -cs[1]):
        cand = cand.strip()
        if not cand or not cand[0].isalpha():
            continue
        if cand.casefold() == word.casefold():
            continue
        if emotion_set(cand) != original:
            return cand
    return None


def prefer_trust_choice(candidates):
    survivors = [
        (c.strip(), s)
        for c, s in sorted(candidates, key=lambda cs: -cs[1])
        if c.strip() and c.strip()[0].isalpha()
    ]
    for cand, _ in survivors:
        if "trust" in emotion_set(cand):
            return cand
    return survivors[0][0] if survivors else None


def simulate_rewrite(text, infiller_table):
    """Walk candidates left to right, recording mask keys as the text mutates."""
    hits = [
        (m.start(), m.end(), m.group())
        for m in TOKEN_RE.finditer(text)
        if emotion_set(m.group()) != NEUTRAL
    ]
    current = text
    delta = 0
    accepted = 0
    for start, end, word in hits:
        lo, hi = start + delta, end + delta
        key = current[:lo] + MASK + current[hi:]
        table = CANDIDATES.get(word.lower())
        if table is None:
            continue  # pipeline queries the key, gets [], skips the span
        infiller_table[key] = [list(cs) for cs in sorted(table, key=lambda cs: -cs[1])]
        choice = different_mode_choice(word, table)
        if choice is None:
            continue
        current = current[:lo] + choice + current[hi:]
        delta += len(choice) - len(word)
        accepted += 1
    return accepted


def build_source(text, span_surfaces):
    """Inference source: control code + demarcated spans, space-normalized."""
    out = text
    for surface in span_surfaces:
        out = out.replace(surface, f" [SEP] {surface} [SEP] ", 1)
    return " ".join(f"trust {out}".split())


def find_span(text, surface):
    start = text.find(surface)
    assert start >= 0, (text, surface)
    assert text.find(surface, start + 1) == -1, f"ambiguous span {surface!r}"
    return {"start": start, "end": start + len(surface), "surface": surface}


def main():
    # connotation.csv
    lines = ["word,emotions"]
    lines += [f"{w},{spec}" for w, spec in CONNOTATION.items()]
    lines += [f"{w},{spec}" for w, spec in EXTRA_CONNOTATION_ROWS]
    (HERE / "connotation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # nrc_emotion.tsv
    rows = [f"{w}\t{e}\t{flag}" for w, e, flag in NRC_ROWS]
    (HERE / "nrc_emotion.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    # collocations.txt
    body = "# partisan collocations (fixture)\n" + "\n".join(COLLOCATIONS) + "\n"
    (HERE / "collocations.txt").write_text(body, encoding="utf-8")

    # toy_corpus.jsonl + infiller keys for the rewrite walk
    infiller_table = {}
    corpus_rows = []
    productive = 0
    for i, text in enumerate(PREMISES, start=1):
        assert any(f" {m} " in f" {text} " for m in ("because", "since", "therefore"))
        corpus_rows.append({"id": f"p{i:02d}", "text": text, "source": "toy"})
        productive += 1 if simulate_rewrite(text, infiller_table) else 0
    for i, text in enumerate(DECOYS, start=len(PREMISES) + 1):
        corpus_rows.append({"id": f"d{i:02d}", "text": text, "source": "toy"})
    assert len(corpus_rows) == 50, len(corpus_rows)
    assert productive >= 40, productive
    with open(HERE / "toy_corpus.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for row in corpus_rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    # test sets (+ PREFER-mode infiller keys, walked sequentially like lexrep)
    testset_rows = {"partisan": [], "fear": []}
    sources = {}
    for rid, text, phrase in PARTISAN_TESTSET:
        span = find_span(text, phrase)
        testset_rows["partisan"].append(
            {"id": rid, "text": text, "source": "fixture", "label": None, "spans": [span]}
        )
        sources[rid] = build_source(text, [phrase])
    for rid, text, words in FEAR_TESTSET:
        spans = [find_span(text, w) for w in words]
        testset_rows["fear"].append(
            {"id": rid, "text": text, "source": "fixture", "label": "premise", "spans": spans}
        )
        sources[rid] = build_source(text, words)
    for task, rows_ in testset_rows.items():
        with open(HERE / f"{task}_testset.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for row in rows_:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    for rid, text, *rest in PARTISAN_TESTSET + [(r, t, w) for r, t, w in FEAR_TESTSET]:
        surfaces = rest[0] if isinstance(rest[0], list) else [rest[0]]
        current = text
        for surface in surfaces:
            start = current.find(surface)
            assert start >= 0
            key = current[:start] + MASK + current[start + len(surface):]
            table = SPAN_CANDIDATES.get((rid, surface))
            if table is None:
                continue
            infiller_table[key] = [list(cs) for cs in sorted(table, key=lambda cs: -cs[1])]
            choice = prefer_trust_choice(table)
            if choice is not None:
                current = current[:start] + choice + current[start + len(surface):]

    with open(HERE / "infiller.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(infiller_table, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")

    # generator rules + scorer rows
    rules = []
    for rid, by_k in GENERATOR_OUTPUTS.items():
        for k, output in by_k.items():
            rule = {"source": sources[rid], "output": output}
            if k is not None:
                rule["k"] = k
            rules.append(rule)
    with open(HERE / "generator.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"rules": rules}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    texts = {rid: text for rid, text, *_ in PARTISAN_TESTSET + FEAR_TESTSET}
    scorer_rows = []
    for rid, k, probs in SCORER_ROWS:
        scorer_rows.append(
            {
                "premise": texts[rid],
                "hypothesis": GENERATOR_OUTPUTS[rid][k],
                "scores": list(probs),
            }
        )
    with open(HERE / "scorer.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"rows": scorer_rows}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    (HERE / "toy.cfg").write_text(TOY_CONFIG, encoding="utf-8")
    print(f"wrote fixtures to {HERE} ({len(infiller_table)} infiller keys)")


if __name__ == "__main__":
    main()
