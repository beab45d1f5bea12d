"""Dataset export/ingest as versioned line-delimited JSON.

Each file starts with a header record {"format", "version", "table"} and
continues with one record per line in a fixed sort order, so identical
store contents always serialize to identical bytes.  Creative labels are
derived on the fly from ratings plus deduplicated highlights; annotator
rosters per passage are recovered from the ratings themselves, which on
complete data coincide with batch assignment.
"""

from __future__ import annotations

import json
from pathlib import Path

from .dedup import augment_with_implicit_negatives, dedup_highlights

FORMAT = "closeread-export"
VERSION = 1

TABLES = ("passages", "expressions", "profiles", "ratings", "highlights",
          "creative_labels")


def _dump(records, table: str, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps({"format": FORMAT, "version": VERSION,
                            "table": table}, sort_keys=True) + "\n")
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def merged_expressions(store):
    """Rated expressions plus deduplicated highlights, straight off a store."""
    ratings = store.live_ratings()
    expr_texts = {}
    passage_of = {}
    for span in store.expressions():
        passage_of[span.expr_id] = span.passage_id
        expr_texts[span.expr_id] = store.get_passage(
            span.passage_id).text[span.char_start : span.char_end]
    highlights = store.highlights()
    hl_texts = [store.get_passage(h.passage_id).text[h.char_start : h.char_end]
                for h in highlights]
    return dedup_highlights(ratings, highlights, expr_texts, passage_of,
                            highlight_texts=hl_texts)


def derive_creative_labels(store):
    """Merged creative-expression table with implicit negatives applied."""
    merged = merged_expressions(store)
    raters_by_passage: dict[str, set] = {}
    for r in store.live_ratings():
        pid = store.get_expression(r.expr_id).passage_id
        raters_by_passage.setdefault(pid, set()).add(r.annotator_id)
    return augment_with_implicit_negatives(
        merged, lambda pid: sorted(raters_by_passage.get(pid, ())))


def export_dataset(store, out_dir) -> dict:
    """Write all tables under out_dir; returns paths plus count diagnostics."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    passages = [{"passage_id": p.passage_id, "text": p.text, "source": p.source,
                 "seed_passage_id": p.seed_passage_id, "word_count": p.word_count}
                for p in store.passages()]

    expressions = [{"expr_id": s.expr_id, "passage_id": s.passage_id,
                    "char_start": s.char_start, "char_end": s.char_end,
                    "pre_highlighted": bool(s.pre_highlighted)}
                   for s in store.expressions()]

    profiles = [{"expr_id": pr.expr_id, "n_star": pr.n_star,
                 "novel_pct": pr.novel_pct, "ppl": pr.ppl,
                 "ppl_log_std": pr.ppl_log_std}
                for pr in store.profiles()]

    ratings = [{"annotator_id": r.annotator_id, "expr_id": r.expr_id,
                "sensical": r.sensical, "pragmatic": r.pragmatic,
                "novel": r.novel, "rationale": r.rationale,
                "comment": r.comment, "timestamp": r.timestamp,
                "nesting_violation": r.nesting_violation}
               for r in sorted(store.live_ratings(),
                               key=lambda r: (r.expr_id, r.annotator_id))]

    highlights = [{"annotator_id": row["annotator_id"],
                   "passage_id": row["passage_id"],
                   "char_start": row["char_start"], "char_end": row["char_end"],
                   "rationale": row["rationale"], "timestamp": row["timestamp"],
                   "duplicate_of_prehighlight":
                       bool(row["duplicate_of_prehighlight"])}
                  for row in store.highlight_rows()]
    highlights.sort(key=lambda h: (h["passage_id"], h["char_start"],
                                   h["char_end"], h["annotator_id"],
                                   h["timestamp"]))

    merged = derive_creative_labels(store)
    labels = []
    for m in merged:
        for ann, creative in sorted(m.labels.items()):
            labels.append({"expr_id": m.expr_id, "passage_id": m.passage_id,
                           "text": m.text, "origin": m.origin,
                           "annotator_id": ann, "creative": creative})
    labels.sort(key=lambda l: (l["passage_id"], l["expr_id"], l["annotator_id"]))

    tables = {"passages": passages, "expressions": expressions,
              "profiles": profiles, "ratings": ratings,
              "highlights": highlights, "creative_labels": labels}
    paths = {}
    for name in TABLES:
        path = out / f"{name}.jsonl"
        _dump(tables[name], name, path)
        paths[name] = path

    diagnostics = {
        "n_passages": len(passages),
        "n_expressions": len(expressions),
        "n_pre_highlighted": sum(e["pre_highlighted"] for e in expressions),
        "n_ratings": len(ratings),
        "n_highlights": len(highlights),
        "n_merged_expressions": len(merged),
        "n_creative_labels": len(labels),
        "n_nesting_violations": sum(r["nesting_violation"] for r in ratings),
    }
    return {"paths": paths, "diagnostics": diagnostics}


def _load(path: Path, table: str):
    with open(path, encoding="utf-8") as f:
        header = json.loads(f.readline())
        if header.get("format") != FORMAT or header.get("table") != table:
            from ..errors import FormatError
            raise FormatError(f"{path} is not a {table} export file")
        if header.get("version") != VERSION:
            from ..errors import FormatError
            raise FormatError(f"unsupported export version {header.get('version')}")
        return [json.loads(line) for line in f if line.strip()]


def ingest_dataset(store, in_dir) -> None:
    """Load a previously exported dataset into an empty store.

    Records are trusted (they were validated on the way in originally), so
    rows are written directly; creative labels are derived, not ingested.
    """
    src = Path(in_dir)
    from ..novelty import NoveltyProfile
    from ..segmentation import ExpressionSpan, Passage

    for rec in _load(src / "passages.jsonl", "passages"):
        store.add_passage(Passage(rec["passage_id"], rec["text"], rec["source"],
                                  rec["seed_passage_id"], rec["word_count"]))
    store.add_expressions([
        ExpressionSpan(rec["expr_id"], rec["passage_id"], rec["char_start"],
                       rec["char_end"], [], rec["pre_highlighted"])
        for rec in _load(src / "expressions.jsonl", "expressions")])
    for rec in _load(src / "profiles.jsonl", "profiles"):
        store.add_profile(NoveltyProfile(rec["expr_id"], rec["n_star"],
                                         rec["novel_pct"], rec["ppl"],
                                         rec["ppl_log_std"]))
    with store._lock, store._conn:
        store._conn.executemany(
            "INSERT OR REPLACE INTO ratings VALUES (?,?,?,?,?,?,?,?)",
            [(rec["annotator_id"], rec["expr_id"], int(rec["sensical"]),
              int(rec["pragmatic"]), int(rec["novel"]), rec["rationale"],
              rec["comment"], rec["timestamp"])
             for rec in _load(src / "ratings.jsonl", "ratings")])
        store._conn.executemany(
            "INSERT INTO highlights (annotator_id, passage_id, char_start, "
            "char_end, rationale, timestamp, duplicate_of_prehighlight) "
            "VALUES (?,?,?,?,?,?,?)",
            [(rec["annotator_id"], rec["passage_id"], rec["char_start"],
              rec["char_end"], rec["rationale"], rec["timestamp"],
              int(rec["duplicate_of_prehighlight"]))
             for rec in _load(src / "highlights.jsonl", "highlights")])
