"""Regenerate the committed toy fixture (corpus, passages, goldens).

The goldens are computed with the brute-force hash-map oracle and an
independent re-derivation of the punctuation split, NOT with the
package, so the fixture stays meaningful as a cross-check.  Hand-worked
expectations for the designed cases are asserted before anything is
written; run from the repository root:

    python3 tests/data/make_toy_fixture.py

Fixture design notes
--------------------
p01  both expressions occur verbatim in the corpus -> NovelPct 0
p02  one out-of-vocabulary word in five tokens     -> n*=1, 1/5
p03  junction bigram "wide cold" never occurs      -> n*=2, 1/6 (selected)
p04  junction bigram "stones the" never occurs     -> n*=2, 1/9 (below cut)
p05  bigrams all occur, "grew thick fog" does not  -> n*=3, 1/4
p06  three expressions: novel bigram / covered / two unseen word forms
p07  injected verbatim into the corpus, 46 tokens  -> contamination fails
p08  injected verbatim, 22 tokens                  -> fails, reduced coverage
p09  held out, 45 tokens, unseen words throughout  -> contamination passes
p10  held out, short, ellipsis + parenthesis split -> passes, reduced
"""

import json
import re
import sys
from fractions import Fraction
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))          # for oracles.py

from oracles import HashMapNgramOracle

# independent re-derivations of the tokenizer and the split rule
TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
SPLIT_CHARS = set(".,;:!?—…()")

THRESHOLD = 0.15
CONTAM_N = 15

CORPUS = [
    "the harbor light swung slow over the water and the boats came home",
    "a cold rain fell on the stones of the quay all through the night",
    "the gull turned wide above the pier and cried once into the wind",
    "moss grew thick on the seaward wall where the nets hung to dry",
    "thick fog rolled in before dawn and sat heavy on the marsh",
    "the keeper trimmed the wick and watched the glass burn clean",
    "salt wind worried the shutters until the latch gave way at last",
    "she counted the lamps along the quay and found one dark",
    "the tide drew back from the flats and left the hulls leaning",
    "old ropes lay coiled by the door of the boathouse in the sun",
    "the bell above the chandlery rang thin in the morning air",
    "he walked the shingle at low water looking for green glass",
    "the nets came up empty again and the men said nothing",
    "smoke rose straight from the cottage chimneys into a pale sky",
    "the channel buoy leaned with the current and righted itself again",
    "winter kept the fleet at anchor for a week of gales",
    "the lamps were lit at dusk and the men rowed out",
]

P07 = ("the fleet lay at anchor through the long week of gales, and the "
       "men mended their nets by the stove in the boathouse, telling the "
       "old stories of the wreck on the bar and the winter the channel "
       "froze from quay to buoy.")
P08 = ("the keeper climbed the stair at dusk, trimmed the wick, and set "
       "the light swinging slow over the water.")

PASSAGES = [
    ("p01", "the harbor light swung slow over the water, and the boats "
            "came home.", "human", "p01"),
    ("p02", "the zanzibar lamps were lit; the keeper trimmed the wick.",
     "olmo", "p01"),
    ("p03", "the gull turned wide cold rain fell, and the men said "
            "nothing.", "human", "p03"),
    ("p04", "cold rain fell on the stones the tide drew back; smoke rose "
            "straight.", "olmo", "p03"),
    ("p05", "moss grew thick fog rolled in, and sat heavy on the marsh.",
     "human", "p05"),
    ("p06", "the bell rang thin (the latch gave way), and one dark lamp "
            "burned.", "olmo", "p05"),
    ("p07", P07, "human", "p07"),
    ("p08", P08, "olmo", "p07"),
    ("p09", "a cormorant crossed the flats at first light, and the "
            "isinglass sheen of the pools lay unbroken till the harmattan "
            "wind came sifting over the marsh, lifting the pale smoke "
            "sideways and setting the channel buoy nodding in the grey "
            "cormorant dawn.", "human", "p09"),
    ("p10", "the quay stood empty… (only the gulls cried), and the grey "
            "morning settled like isinglass.", "olmo", "p09"),
]

INJECTED = ("p07", "p08")

# hand-worked expectations: expr_id -> (n_star, NovelPct, selected)
INTENT = {
    "p01:000": (None, Fraction(0), False),
    "p01:001": (None, Fraction(0), False),
    "p02:000": (1, Fraction(1, 5), True),
    "p02:001": (None, Fraction(0), False),
    "p03:000": (2, Fraction(1, 6), True),
    "p03:001": (None, Fraction(0), False),
    "p04:000": (2, Fraction(1, 9), False),
    "p04:001": (None, Fraction(0), False),
    "p05:000": (3, Fraction(1, 4), True),
    "p05:001": (None, Fraction(0), False),
    "p06:000": (2, Fraction(1, 3), True),
    "p06:001": (None, Fraction(0), False),
    "p06:002": (1, Fraction(2, 5), True),
    "p07:000": (None, Fraction(0), False),
    "p07:001": (None, Fraction(0), False),
    "p07:002": (None, Fraction(0), False),
    "p08:000": (None, Fraction(0), False),
    "p08:001": (None, Fraction(0), False),
    "p08:002": (None, Fraction(0), False),
}

# word pairs / runs that the design requires to be absent everywhere
MUST_BE_ABSENT = [
    ("zanzibar",), ("lamp",), ("burned",), ("gulls",),
    ("wide", "cold"), ("stones", "the"), ("bell", "rang"),
    ("grew", "thick", "fog"),
]


def split_spans(text):
    """(start, end) spans between split characters, whitespace-trimmed."""
    spans, seg_start = [], 0
    for i, ch in enumerate(text):
        if ch in SPLIT_CHARS:
            spans.append((seg_start, i))
            seg_start = i + 1
    spans.append((seg_start, len(text)))
    out = []
    for a, b in spans:
        chunk = text[a:b]
        lead = len(chunk) - len(chunk.lstrip())
        a, b = a + lead, a + len(chunk.rstrip())
        if a < b:
            out.append((a, b))
    return out


def novelty(tokens, oracle):
    for n in range(1, len(tokens) + 1):
        grams = [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]
        zeros = sum(1 for g in grams if oracle.count(g) == 0)
        if zeros:
            return n, Fraction(zeros, len(grams))
    return None, Fraction(0)


def main():
    corpus = CORPUS + [PASSAGES[6][1], PASSAGES[7][1]]  # p07/p08 injected
    docs = [TOKEN_RE.findall(doc) for doc in corpus]
    oracle = HashMapNgramOracle(docs)

    for gram in MUST_BE_ABSENT:
        assert oracle.count(gram) == 0, f"design violated: {gram} occurs"

    expressions = []
    contamination = {}
    for pid, text, _source, _seed in PASSAGES:
        toks = TOKEN_RE.findall(text)
        windows = [tuple(toks[i : i + CONTAM_N])
                   for i in range(len(toks) - CONTAM_N + 1)]
        counts = [oracle.count(w) for w in windows]
        if pid in INJECTED:
            assert counts and all(c > 0 for c in counts), \
                f"{pid}: injected passage must be fully present"
        else:
            assert all(c == 0 for c in counts), \
                f"{pid}: held-out passage leaks a {CONTAM_N}-gram"
        contamination[pid] = {
            "passed": pid not in INJECTED,
            "reduced_coverage": len(toks) < 3 * CONTAM_N,
            "n_windows": len(windows),
        }

        for k, (a, b) in enumerate(split_spans(text)):
            expr_id = f"{pid}:{k:03d}"
            span_toks = TOKEN_RE.findall(text[a:b])
            n_star, pct = novelty(span_toks, oracle)
            if expr_id in INTENT:
                assert (n_star, pct) == INTENT[expr_id][:2], \
                    f"{expr_id}: got ({n_star}, {pct})"
                assert (pct >= THRESHOLD) == INTENT[expr_id][2], expr_id
            expressions.append({
                "expr_id": expr_id, "passage_id": pid,
                "char_start": a, "char_end": b, "text": text[a:b],
                "n_star": n_star, "novel_pct": float(pct),
                "selected": pct >= THRESHOLD,
            })

    n_sel = sum(e["selected"] for e in expressions)
    assert 5 <= n_sel <= len(expressions) - 5, "selection should be mixed"

    (HERE / "toy_corpus.txt").write_text("\n".join(corpus) + "\n",
                                         encoding="utf-8")
    with open(HERE / "toy_passages.jsonl", "w", encoding="utf-8") as f:
        for pid, text, source, seed in PASSAGES:
            f.write(json.dumps({"passage_id": pid, "text": text,
                                "source": source, "seed_passage_id": seed},
                               ensure_ascii=False) + "\n")
    with open(HERE / "toy_goldens.json", "w", encoding="utf-8") as f:
        json.dump({"threshold": THRESHOLD, "tokenizer": "ws_punct",
                   "contamination_n": CONTAM_N,
                   "expressions": expressions,
                   "contamination": contamination},
                  f, indent=2, ensure_ascii=False, sort_keys=True)
        f.write("\n")
    print(f"{len(corpus)} corpus docs, {len(expressions)} expressions, "
          f"{n_sel} selected")


if __name__ == "__main__":
    main()
