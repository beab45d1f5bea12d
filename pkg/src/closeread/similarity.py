"""String similarity on top of the edit-distance kernel.

ratio() is the classic normalized indel similarity: substitution costs 2
(one delete plus one insert), so ratio = (|a| + |b| - dist) / (|a| + |b|),
equivalently 2*LCS/(|a|+|b|).  1.0 means identical, 0.0 means disjoint.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


def _codepoints(s: str) -> np.ndarray:
    return np.array([ord(c) for c in s], dtype=np.int64)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with substitution cost 2."""
    return _kernels.indel_distance(_codepoints(a), _codepoints(b))


def ratio(a: str, b: str) -> float:
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return (total - edit_distance(a, b)) / total
