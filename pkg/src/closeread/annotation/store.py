"""Single-file sqlite store for the close-reading data model.

WAL journaling gives durable concurrent writes without a server; one
writer at a time is serialized by an in-process lock plus sqlite's own
busy handler (good enough for a few dozen annotator sessions).  Ratings
are last-write-wins per (annotator, expression) with every submission
retained in an append-only audit table.
"""

from __future__ import annotations

import sqlite3
import threading

from ..errors import NotFoundError, StoreError, ValidationError
from ..novelty import NoveltyProfile
from ..segmentation import ExpressionSpan, Passage
from .records import Batch, HighlightRecord, RatingRecord

_SCHEMA = """
CREATE TABLE IF NOT EXISTS passages (
    passage_id TEXT PRIMARY KEY,
    text TEXT NOT NULL,
    source TEXT NOT NULL,
    seed_passage_id TEXT NOT NULL,
    word_count INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS expressions (
    expr_id TEXT PRIMARY KEY,
    passage_id TEXT NOT NULL REFERENCES passages(passage_id),
    char_start INTEGER NOT NULL,
    char_end INTEGER NOT NULL,
    pre_highlighted INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS profiles (
    expr_id TEXT PRIMARY KEY REFERENCES expressions(expr_id),
    n_star INTEGER,
    novel_pct REAL NOT NULL,
    ppl REAL NOT NULL,
    ppl_log_std REAL
);
CREATE TABLE IF NOT EXISTS batches (
    batch_id TEXT PRIMARY KEY,
    is_training INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS batch_passages (
    batch_id TEXT NOT NULL REFERENCES batches(batch_id),
    passage_id TEXT NOT NULL REFERENCES passages(passage_id),
    position INTEGER NOT NULL,
    PRIMARY KEY (batch_id, passage_id)
);
CREATE TABLE IF NOT EXISTS batch_annotators (
    batch_id TEXT NOT NULL REFERENCES batches(batch_id),
    annotator_id TEXT NOT NULL,
    PRIMARY KEY (batch_id, annotator_id)
);
CREATE TABLE IF NOT EXISTS ratings (
    annotator_id TEXT NOT NULL,
    expr_id TEXT NOT NULL REFERENCES expressions(expr_id),
    sensical INTEGER NOT NULL,
    pragmatic INTEGER NOT NULL,
    novel INTEGER NOT NULL,
    rationale TEXT NOT NULL DEFAULT '',
    comment TEXT NOT NULL DEFAULT '',
    timestamp TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (annotator_id, expr_id)
);
CREATE TABLE IF NOT EXISTS rating_audit (
    audit_id INTEGER PRIMARY KEY AUTOINCREMENT,
    annotator_id TEXT NOT NULL,
    expr_id TEXT NOT NULL,
    sensical INTEGER NOT NULL,
    pragmatic INTEGER NOT NULL,
    novel INTEGER NOT NULL,
    rationale TEXT NOT NULL,
    comment TEXT NOT NULL,
    timestamp TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS highlights (
    highlight_id INTEGER PRIMARY KEY AUTOINCREMENT,
    annotator_id TEXT NOT NULL,
    passage_id TEXT NOT NULL REFERENCES passages(passage_id),
    char_start INTEGER NOT NULL,
    char_end INTEGER NOT NULL,
    rationale TEXT NOT NULL,
    timestamp TEXT NOT NULL DEFAULT '',
    duplicate_of_prehighlight INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS completions (
    batch_id TEXT NOT NULL REFERENCES batches(batch_id),
    annotator_id TEXT NOT NULL,
    completed_at TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (batch_id, annotator_id)
);
"""


class AnnotationStore:
    def __init__(self, path):
        self._conn = sqlite3.connect(str(path), check_same_thread=False,
                                     timeout=30.0)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.Lock()
        with self._lock, self._conn:
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA foreign_keys=ON")
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- corpus setup -------------------------------------------------------

    def add_passage(self, p: Passage) -> None:
        try:
            with self._lock, self._conn:
                self._conn.execute(
                    "INSERT INTO passages VALUES (?,?,?,?,?)",
                    (p.passage_id, p.text, p.source, p.seed_passage_id,
                     p.word_count))
        except sqlite3.IntegrityError as e:
            raise StoreError(f"cannot store passage {p.passage_id!r}: {e}") from e

    def add_expressions(self, spans: list[ExpressionSpan]) -> None:
        try:
            with self._lock, self._conn:
                self._conn.executemany(
                    "INSERT INTO expressions VALUES (?,?,?,?,?)",
                    [(s.expr_id, s.passage_id, s.char_start, s.char_end,
                      int(s.pre_highlighted)) for s in spans])
        except sqlite3.IntegrityError as e:
            raise StoreError(f"expression references a missing passage: {e}") from e

    def add_profile(self, pr: NoveltyProfile) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO profiles VALUES (?,?,?,?,?)",
                (pr.expr_id, pr.n_star, pr.novel_pct, pr.ppl, pr.ppl_log_std))

    def add_batch(self, b: Batch) -> None:
        b.validate()
        with self._lock, self._conn:
            self._conn.execute("INSERT INTO batches VALUES (?,?)",
                               (b.batch_id, int(b.is_training)))
            self._conn.executemany(
                "INSERT INTO batch_passages VALUES (?,?,?)",
                [(b.batch_id, pid, i) for i, pid in enumerate(b.passage_ids)])
            self._conn.executemany(
                "INSERT INTO batch_annotators VALUES (?,?)",
                [(b.batch_id, a) for a in b.assigned_annotators])

    # -- reads ---------------------------------------------------------------

    def get_passage(self, passage_id: str) -> Passage:
        row = self._conn.execute(
            "SELECT * FROM passages WHERE passage_id=?", (passage_id,)).fetchone()
        if row is None:
            raise NotFoundError(f"no passage {passage_id!r}")
        return Passage(row["passage_id"], row["text"], row["source"],
                       row["seed_passage_id"], row["word_count"])

    def passages(self) -> list[Passage]:
        rows = self._conn.execute(
            "SELECT * FROM passages ORDER BY passage_id").fetchall()
        return [Passage(r["passage_id"], r["text"], r["source"],
                        r["seed_passage_id"], r["word_count"]) for r in rows]

    def expressions(self, passage_id: str | None = None) -> list[ExpressionSpan]:
        sql = "SELECT * FROM expressions"
        args: tuple = ()
        if passage_id is not None:
            sql += " WHERE passage_id=?"
            args = (passage_id,)
        rows = self._conn.execute(sql + " ORDER BY passage_id, char_start", args)
        return [self._span(r) for r in rows]

    def get_expression(self, expr_id: str) -> ExpressionSpan:
        row = self._conn.execute(
            "SELECT * FROM expressions WHERE expr_id=?", (expr_id,)).fetchone()
        if row is None:
            raise NotFoundError(f"no expression {expr_id!r}")
        return self._span(row)

    @staticmethod
    def _span(r) -> ExpressionSpan:
        return ExpressionSpan(r["expr_id"], r["passage_id"], r["char_start"],
                              r["char_end"], [], bool(r["pre_highlighted"]))

    def expression_text(self, expr_id: str) -> str:
        s = self.get_expression(expr_id)
        return self.get_passage(s.passage_id).text[s.char_start : s.char_end]

    def profiles(self) -> list[NoveltyProfile]:
        rows = self._conn.execute("SELECT * FROM profiles ORDER BY expr_id")
        return [NoveltyProfile(r["expr_id"], r["n_star"], r["novel_pct"],
                               r["ppl"], r["ppl_log_std"]) for r in rows]

    def get_batch(self, batch_id: str) -> Batch:
        row = self._conn.execute(
            "SELECT * FROM batches WHERE batch_id=?", (batch_id,)).fetchone()
        if row is None:
            raise NotFoundError(f"no batch {batch_id!r}")
        pids = [r["passage_id"] for r in self._conn.execute(
            "SELECT passage_id FROM batch_passages WHERE batch_id=? ORDER BY position",
            (batch_id,))]
        anns = [r["annotator_id"] for r in self._conn.execute(
            "SELECT annotator_id FROM batch_annotators WHERE batch_id=? "
            "ORDER BY annotator_id", (batch_id,))]
        return Batch(batch_id, pids, anns, bool(row["is_training"]))

    def batches(self) -> list[Batch]:
        ids = [r["batch_id"] for r in self._conn.execute(
            "SELECT batch_id FROM batches ORDER BY batch_id")]
        return [self.get_batch(i) for i in ids]

    def batches_for(self, annotator_id: str) -> list[Batch]:
        ids = [r["batch_id"] for r in self._conn.execute(
            "SELECT batch_id FROM batch_annotators WHERE annotator_id=? "
            "ORDER BY batch_id", (annotator_id,))]
        return [self.get_batch(i) for i in ids]

    def pre_highlighted(self, batch: Batch) -> list[ExpressionSpan]:
        out = []
        for pid in batch.passage_ids:
            out.extend(s for s in self.expressions(pid) if s.pre_highlighted)
        return out

    def _annotator_sees(self, annotator_id: str, passage_id: str) -> bool:
        row = self._conn.execute(
            "SELECT 1 FROM batch_annotators ba JOIN batch_passages bp "
            "ON ba.batch_id = bp.batch_id "
            "WHERE ba.annotator_id=? AND bp.passage_id=? LIMIT 1",
            (annotator_id, passage_id)).fetchone()
        return row is not None

    # -- annotation writes ---------------------------------------------------

    def record_rating(self, r: RatingRecord) -> int:
        r.validate()
        expr = self.get_expression(r.expr_id)
        if not expr.pre_highlighted:
            raise ValidationError(
                "ratings apply only to pre-highlighted expressions", field="expr_id")
        if not self._annotator_sees(r.annotator_id, expr.passage_id):
            raise NotFoundError(
                f"annotator {r.annotator_id!r} is not assigned this expression")
        with self._lock, self._conn:
            cur = self._conn.execute(
                "INSERT INTO rating_audit (annotator_id, expr_id, sensical, "
                "pragmatic, novel, rationale, comment, timestamp) "
                "VALUES (?,?,?,?,?,?,?,?)",
                (r.annotator_id, r.expr_id, int(r.sensical), int(r.pragmatic),
                 int(r.novel), r.rationale, r.comment, r.timestamp))
            self._conn.execute(
                "INSERT OR REPLACE INTO ratings VALUES (?,?,?,?,?,?,?,?)",
                (r.annotator_id, r.expr_id, int(r.sensical), int(r.pragmatic),
                 int(r.novel), r.rationale, r.comment, r.timestamp))
            return int(cur.lastrowid)

    def record_highlight(self, h: HighlightRecord) -> int:
        passage = self.get_passage(h.passage_id)
        h.validate(len(passage.text))
        if not self._annotator_sees(h.annotator_id, h.passage_id):
            raise NotFoundError(
                f"annotator {h.annotator_id!r} is not assigned this passage")
        dup = self._conn.execute(
            "SELECT 1 FROM expressions WHERE passage_id=? AND char_start=? "
            "AND char_end=? AND pre_highlighted=1 LIMIT 1",
            (h.passage_id, h.char_start, h.char_end)).fetchone() is not None
        with self._lock, self._conn:
            cur = self._conn.execute(
                "INSERT INTO highlights (annotator_id, passage_id, char_start, "
                "char_end, rationale, timestamp, duplicate_of_prehighlight) "
                "VALUES (?,?,?,?,?,?,?)",
                (h.annotator_id, h.passage_id, h.char_start, h.char_end,
                 h.rationale, h.timestamp, int(dup)))
            return int(cur.lastrowid)

    def record_completion(self, batch_id: str, annotator_id: str,
                          completed_at: str = "") -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO completions VALUES (?,?,?)",
                (batch_id, annotator_id, completed_at))

    # -- annotation reads ----------------------------------------------------

    def live_ratings(self, expr_ids=None) -> list[RatingRecord]:
        rows = self._conn.execute(
            "SELECT * FROM ratings ORDER BY expr_id, annotator_id").fetchall()
        out = [RatingRecord(r["annotator_id"], r["expr_id"], bool(r["sensical"]),
                            bool(r["pragmatic"]), bool(r["novel"]),
                            r["rationale"], r["comment"], r["timestamp"])
               for r in rows]
        if expr_ids is not None:
            wanted = set(expr_ids)
            out = [r for r in out if r.expr_id in wanted]
        return out

    def audit_length(self, annotator_id: str, expr_id: str) -> int:
        row = self._conn.execute(
            "SELECT COUNT(*) AS n FROM rating_audit WHERE annotator_id=? AND expr_id=?",
            (annotator_id, expr_id)).fetchone()
        return int(row["n"])

    def highlights(self, passage_id: str | None = None) -> list[HighlightRecord]:
        sql = "SELECT * FROM highlights"
        args: tuple = ()
        if passage_id is not None:
            sql += " WHERE passage_id=?"
            args = (passage_id,)
        rows = self._conn.execute(sql + " ORDER BY highlight_id", args)
        return [HighlightRecord(r["annotator_id"], r["passage_id"],
                                r["char_start"], r["char_end"], r["rationale"],
                                r["timestamp"]) for r in rows]

    def highlight_rows(self) -> list[sqlite3.Row]:
        return self._conn.execute(
            "SELECT * FROM highlights ORDER BY highlight_id").fetchall()

    def missing_ratings(self, batch: Batch, annotator_id: str | None = None):
        """(annotator_id, expr_id) pairs still unrated for the batch."""
        annotators = [annotator_id] if annotator_id else batch.assigned_annotators
        rated = {(r["annotator_id"], r["expr_id"]) for r in self._conn.execute(
            "SELECT annotator_id, expr_id FROM ratings")}
        missing = []
        for ann in annotators:
            for span in self.pre_highlighted(batch):
                if (ann, span.expr_id) not in rated:
                    missing.append((ann, span.expr_id))
        return missing

    def progress(self, batch: Batch, annotator_id: str) -> tuple[int, int]:
        total = len(self.pre_highlighted(batch))
        missing = len(self.missing_ratings(batch, annotator_id))
        return total - missing, total

    def is_complete(self, batch_id: str, annotator_id: str) -> bool:
        row = self._conn.execute(
            "SELECT 1 FROM completions WHERE batch_id=? AND annotator_id=?",
            (batch_id, annotator_id)).fetchone()
        return row is not None

    def nesting_violations(self) -> list[RatingRecord]:
        """Pragmatic-but-nonsensical ratings, surfaced rather than rejected."""
        return [r for r in self.live_ratings() if r.nesting_violation]
