"""Throwaway /v1 service for UI round-trip tests.

Builds a three-passage store (one with pre-highlights, one bare so the UI
falls into highlight-only mode, one inside a training batch), prints a
single JSON line with the base address, bearer token and store path, then
serves until killed.
"""

import json
import socket
import tempfile
from pathlib import Path

import uvicorn

from closeread.annotation import AnnotationStore, Batch
from closeread.segmentation import ExpressionSpan, Passage
from closeread.service import create_app, issue_token

SECRET = "ui-test-secret"

P1 = ("The harbor light swung like a slow pendulum. Gulls wrote their "
      "hunger across the sky. A rope of fog slid over the breakwater "
      "and untied itself.")
P2 = ("Morning came up the hill the way the tide comes in, without "
      "hurry and without mercy.")
P3 = "The clocktower counted the hour twice, as if unsure anyone was listening."

PRE = [
    ("x01", "p1", "like a slow pendulum"),
    ("x02", "p1", "wrote their hunger across the sky"),
    ("x03", "p1", "untied itself"),
    ("x04", "p3", "counted the hour twice"),
]


def _span(expr_id: str, pid: str, text: str, phrase: str) -> ExpressionSpan:
    i = text.index(phrase)
    return ExpressionSpan(expr_id, pid, i, i + len(phrase), [], True)


def main() -> None:
    root = Path(tempfile.mkdtemp(prefix="closeread-ui-"))
    store_path = root / "store.db"
    store = AnnotationStore(store_path)
    texts = {"p1": P1, "p2": P2, "p3": P3}
    for pid, text in texts.items():
        store.add_passage(Passage(pid, text))
    store.add_expressions([_span(e, p, texts[p], ph) for e, p, ph in PRE])
    store.add_batch(Batch("b-main", ["p1", "p2"], ["writer1"], is_training=False))
    store.add_batch(Batch("b-train", ["p3"], ["writer1"], is_training=True))

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    print(json.dumps({
        "base": f"http://127.0.0.1:{port}",
        "token": issue_token(SECRET, "writer1"),
        "store": str(store_path),
        "main_batch": "b-main",
        "training_batch": "b-train",
    }), flush=True)
    uvicorn.run(create_app(store, SECRET), host="127.0.0.1", port=port,
                log_level="warning")


if __name__ == "__main__":
    main()
