import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from closeread.ngram_index import build_index
from closeread.tokenization import tokenize_corpus


@pytest.fixture(scope="session")
def tiny_corpus_docs():
    return [
        "the cat sat on the mat",
        "the cat ran over the hill",
        "a dog sat on a log",
    ]


@pytest.fixture(scope="session")
def tiny_index(tiny_corpus_docs):
    return build_index(tokenize_corpus(tiny_corpus_docs, scheme="whitespace"))


def random_corpus(rng: np.random.Generator, max_tokens: int = 10_000,
                  vocab_max: int = 50):
    """Random multi-document token-id corpus, sizes skewed small."""
    vocab = int(rng.integers(2, vocab_max + 1))
    total = int(np.exp(rng.uniform(np.log(20), np.log(max_tokens))))
    docs = []
    left = total
    while left > 0:
        size = int(min(left, rng.integers(1, max(2, total // 3) + 1)))
        docs.append(rng.integers(0, vocab, size=size).tolist())
        left -= size
    return docs, vocab
