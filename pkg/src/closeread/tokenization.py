"""Tokenizers and the token-sequence container the index is built over.

The default ``ws_punct`` scheme splits on whitespace and breaks punctuation
out as single-character tokens ("don't" -> don / ' / t).  Nothing is
lowercased.  Schemes are looked up by name so results can state which one
was used.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConfigError

_WS_PUNCT_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def _split_ws_punct(text: str) -> list[str]:
    return _WS_PUNCT_RE.findall(text)


def _split_whitespace(text: str) -> list[str]:
    return text.split()


_SCHEMES = {
    "ws_punct": _split_ws_punct,
    "whitespace": _split_whitespace,
}


def split_text(text: str, scheme: str = "ws_punct") -> list[str]:
    """Split text into token strings under the named scheme."""
    try:
        fn = _SCHEMES[scheme]
    except KeyError:
        raise ConfigError(f"unknown tokenizer scheme {scheme!r}; "
                          f"known: {sorted(_SCHEMES)}") from None
    return fn(text)


class Vocab:
    """token string <-> dense id map; ids assigned in first-seen order."""

    def __init__(self, strings=()):
        self._strings: list[str] = []
        self._ids: dict[str, int] = {}
        for s in strings:
            self.add(s)

    def add(self, s: str) -> int:
        i = self._ids.get(s)
        if i is None:
            i = len(self._strings)
            self._ids[s] = i
            self._strings.append(s)
        return i

    def id(self, s: str):
        return self._ids.get(s)

    def token(self, i: int) -> str:
        return self._strings[i]

    def strings(self) -> list[str]:
        return list(self._strings)

    def __len__(self) -> int:
        return len(self._strings)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self._strings == other._strings


@dataclass
class TokenSequence:
    """Token ids over one or more documents.

    ``doc_boundaries`` holds the end position of every document (exclusive,
    strictly increasing, last entry == number of tokens).  N-gram queries
    never match across a boundary.
    """

    tokens: np.ndarray
    vocab: Vocab
    doc_boundaries: np.ndarray = field(default=None)
    scheme: str = "ws_punct"

    def __post_init__(self):
        self.tokens = np.ascontiguousarray(self.tokens, dtype=np.int64)
        n = self.tokens.size
        if self.doc_boundaries is None:
            self.doc_boundaries = np.array([n], dtype=np.int64)
        self.doc_boundaries = np.ascontiguousarray(self.doc_boundaries, dtype=np.int64)
        b = self.doc_boundaries
        if b.size and b[-1] > n:
            raise ArgumentError("doc boundary past the token count")
        if b.size == 0 or b[-1] < n:
            # trailing tokens form an implicit final document
            b = np.append(b, n)
            self.doc_boundaries = b
        if n > 0 and (b[0] <= 0 or np.any(np.diff(b) <= 0)):
            raise ArgumentError("doc_boundaries must be strictly increasing")
        if n and int(self.tokens.max()) >= len(self.vocab):
            raise ArgumentError("token id out of vocab range")
        if n and int(self.tokens.min()) < 0:
            raise ArgumentError("negative token id")

    def __len__(self) -> int:
        return int(self.tokens.size)

    @property
    def n_docs(self) -> int:
        return int(self.doc_boundaries.size)

    def token_strings(self) -> list[str]:
        return [self.vocab.token(int(i)) for i in self.tokens]


def tokenize(text: str, scheme: str = "ws_punct", vocab: Vocab | None = None) -> TokenSequence:
    """Tokenize one document into a TokenSequence (new vocab unless given)."""
    vocab = vocab if vocab is not None else Vocab()
    ids = [vocab.add(s) for s in split_text(text, scheme)]
    arr = np.array(ids, dtype=np.int64)
    return TokenSequence(arr, vocab, np.array([len(ids)], dtype=np.int64), scheme)


def tokenize_corpus(docs, scheme: str = "ws_punct") -> TokenSequence:
    """Tokenize an iterable of documents into one boundary-aware sequence."""
    vocab = Vocab()
    ids: list[int] = []
    bounds: list[int] = []
    for doc in docs:
        ids.extend(vocab.add(s) for s in split_text(doc, scheme))
        bounds.append(len(ids))
    if not bounds:
        raise ArgumentError("corpus has no documents")
    return TokenSequence(np.array(ids, dtype=np.int64), vocab,
                         np.array(bounds, dtype=np.int64), scheme)


def encode(text: str, vocab: Vocab, scheme: str = "ws_punct") -> list:
    """Token ids for a query string; unseen tokens map to None."""
    return [vocab.id(s) for s in split_text(text, scheme)]
