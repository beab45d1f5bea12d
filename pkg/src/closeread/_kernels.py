"""Numeric inner loops with two interchangeable backends.

The hot kernels (suffix-array construction, suffix-range binary search and
the indel edit-distance table) are compiled with numba's @njit when numba
is importable.  A pure-numpy implementation of each kernel is always
defined and can be forced with::

    CLOSEREAD_BACKEND=numpy   # or "numba" to require the compiled path

Both backends are exact integer algorithms and return bitwise-identical
results; ``benchmarks/bench_kernels.py`` times one against the other.

Suffix ordering is total: ties between equal prefixes are resolved by the
shorter-suffix-first rule of the doubling comparison, and positions of
genuinely equal keys keep their stable (position) order.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError

_ENV_VAR = "CLOSEREAD_BACKEND"


def _requested_backend() -> str:
    want = os.environ.get(_ENV_VAR, "").strip().lower()
    if want in ("", "auto"):
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            return "numpy"
    if want == "numpy":
        return "numpy"
    if want == "numba":
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError as exc:
            raise ConfigError(f"{_ENV_VAR}=numba but numba is not importable") from exc
    raise ConfigError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {want!r}")


BACKEND = _requested_backend()


# ---------------------------------------------------------------------------
# Pure-numpy implementations (always available)
# ---------------------------------------------------------------------------


def _suffix_array_numpy(arr: np.ndarray) -> np.ndarray:
    """Prefix-doubling suffix array via stable lexsort, O(n log^2 n)."""
    n = arr.size
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    rank = arr.astype(np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        order = np.lexsort((second, rank))  # stable; primary key listed last
        key1 = rank[order]
        key2 = second[order]
        changed = np.empty(n, dtype=bool)
        changed[0] = False
        changed[1:] = (key1[1:] != key1[:-1]) | (key2[1:] != key2[:-1])
        new_rank_sorted = np.cumsum(changed)
        if new_rank_sorted[-1] == n - 1:
            return order.astype(np.int64)
        k *= 2
        if k >= n:
            # only reachable for sequences with repeated full suffixes,
            # which the trailing separator rules out; stable order stands
            return order.astype(np.int64)
        rank = np.empty(n, dtype=np.int64)
        rank[order] = new_rank_sorted


def _cmp_suffix_numpy(arr: np.ndarray, pos: int, q: np.ndarray) -> int:
    """-1 if suffix@pos < q, 0 if q is a prefix of the suffix, 1 if greater."""
    seg = arr[pos : pos + q.size]
    m = seg.size
    neq = np.nonzero(seg != q[:m])[0]
    if neq.size:
        j = neq[0]
        return -1 if seg[j] < q[j] else 1
    return -1 if m < q.size else 0


def _suffix_bounds_numpy(arr: np.ndarray, sa: np.ndarray, q: np.ndarray):
    lo, hi = 0, sa.size
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_suffix_numpy(arr, sa[mid], q) < 0:
            lo = mid + 1
        else:
            hi = mid
    start = lo
    hi = sa.size
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_suffix_numpy(arr, sa[mid], q) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return start, lo


def _indel_distance_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance with unit insert/delete and substitution cost 2.

    Equals len(a)+len(b)-2*LCS(a,b); the distance underlying the classic
    Levenshtein "ratio".  Row recurrence vectorized with the prefix-min
    trick: cur[j] = j + min_{i<=j} (t[i] - i).
    """
    la, lb = a.size, b.size
    if la == 0 or lb == 0:
        return la + lb
    jr = np.arange(lb + 1, dtype=np.int64)
    prev = jr.copy()
    t = np.empty(lb + 1, dtype=np.int64)
    for i in range(1, la + 1):
        sub = np.where(b == a[i - 1], 0, 2)
        t[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + sub, out=t[1:])
        prev = jr + np.minimum.accumulate(t - jr)
    return int(prev[lb])


# ---------------------------------------------------------------------------
# numba-compiled implementations
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _suffix_array_numba(arr):
        """Prefix-doubling with two-pass counting sort (radix), O(n log n)."""
        n = arr.size
        sa = np.empty(n, dtype=np.int64)
        if n == 1:
            sa[0] = 0
            return sa
        rank = np.empty(n, dtype=np.int64)
        maxv = np.int64(0)
        for i in range(n):
            rank[i] = arr[i]
            if rank[i] > maxv:
                maxv = rank[i]
        tmp = np.empty(n, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        order2 = np.empty(n, dtype=np.int64)
        k = 1
        while True:
            nbuckets = maxv + 2  # second keys shifted by +1 so "past end" is 0
            cnt = np.zeros(nbuckets, dtype=np.int64)
            for i in range(n):
                k2 = rank[i + k] + 1 if i + k < n else 0
                cnt[k2] += 1
            total = 0
            for v in range(nbuckets):
                c = cnt[v]
                cnt[v] = total
                total += c
            for i in range(n):
                k2 = rank[i + k] + 1 if i + k < n else 0
                order2[cnt[k2]] = i
                cnt[k2] += 1
            # stable pass on the first key
            cnt1 = np.zeros(nbuckets, dtype=np.int64)
            for i in range(n):
                cnt1[rank[i]] += 1
            total = 0
            for v in range(nbuckets):
                c = cnt1[v]
                cnt1[v] = total
                total += c
            for j in range(n):
                i = order2[j]
                order[cnt1[rank[i]]] = i
                cnt1[rank[i]] += 1
            # re-rank
            prev = order[0]
            tmp[prev] = 0
            r = np.int64(0)
            for j in range(1, n):
                cur = order[j]
                c2 = rank[cur + k] + 1 if cur + k < n else 0
                p2 = rank[prev + k] + 1 if prev + k < n else 0
                if rank[cur] != rank[prev] or c2 != p2:
                    r += 1
                tmp[cur] = r
                prev = cur
            if r == n - 1:
                for j in range(n):
                    sa[j] = order[j]
                return sa
            for i in range(n):
                rank[i] = tmp[i]
            maxv = r
            k *= 2
            if k >= n:
                for j in range(n):
                    sa[j] = order[j]
                return sa

    @njit(cache=True)
    def _cmp_suffix_numba(arr, pos, q):
        n = arr.size
        for j in range(q.size):
            if pos + j >= n:
                return -1
            a = arr[pos + j]
            b = q[j]
            if a < b:
                return -1
            if a > b:
                return 1
        return 0

    @njit(cache=True)
    def _suffix_bounds_numba(arr, sa, q):
        lo, hi = 0, sa.size
        while lo < hi:
            mid = (lo + hi) // 2
            if _cmp_suffix_numba(arr, sa[mid], q) < 0:
                lo = mid + 1
            else:
                hi = mid
        start = lo
        hi = sa.size
        while lo < hi:
            mid = (lo + hi) // 2
            if _cmp_suffix_numba(arr, sa[mid], q) <= 0:
                lo = mid + 1
            else:
                hi = mid
        return start, lo

    @njit(cache=True)
    def _indel_distance_numba(a, b):
        la, lb = a.size, b.size
        if la == 0 or lb == 0:
            return la + lb
        prev = np.empty(lb + 1, dtype=np.int64)
        cur = np.empty(lb + 1, dtype=np.int64)
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            cur[0] = i
            ai = a[i - 1]
            for j in range(1, lb + 1):
                best = prev[j] + 1
                t = cur[j - 1] + 1
                if t < best:
                    best = t
                t = prev[j - 1] + (0 if ai == b[j - 1] else 2)
                if t < best:
                    best = t
                cur[j] = best
            prev, cur = cur, prev
        return prev[lb]


# ---------------------------------------------------------------------------
# Public dispatch
# ---------------------------------------------------------------------------


def _as_i64(arr) -> np.ndarray:
    return np.ascontiguousarray(arr, dtype=np.int64)


def build_suffix_array(arr) -> np.ndarray:
    """Suffix array (int64 positions) of a non-negative int sequence."""
    arr = _as_i64(arr)
    if arr.size == 0:
        return np.empty(0, dtype=np.int64)
    if BACKEND == "numba":
        return _suffix_array_numba(arr)
    return _suffix_array_numpy(arr)


def suffix_bounds(arr, sa, q) -> tuple[int, int]:
    """Half-open [lo, hi) range of suffixes starting with q; count = hi - lo."""
    arr = _as_i64(arr)
    q = _as_i64(q)
    if q.size == 0 or sa.size == 0:
        return 0, 0
    if BACKEND == "numba":
        lo, hi = _suffix_bounds_numba(arr, _as_i64(sa), q)
    else:
        lo, hi = _suffix_bounds_numpy(arr, _as_i64(sa), q)
    return int(lo), int(hi)


def indel_distance(a, b) -> int:
    """Unit-indel / substitution-cost-2 edit distance between int sequences."""
    a = _as_i64(a)
    b = _as_i64(b)
    if BACKEND == "numba":
        return int(_indel_distance_numba(a, b))
    return int(_indel_distance_numpy(a, b))


def implementations():
    """Backend -> kernel mapping, for the comparison benchmark and tests."""
    impls = {
        "numpy": {
            "suffix_array": _suffix_array_numpy,
            "suffix_bounds": _suffix_bounds_numpy,
            "indel_distance": _indel_distance_numpy,
        }
    }
    if BACKEND == "numba":
        impls["numba"] = {
            "suffix_array": _suffix_array_numba,
            "suffix_bounds": _suffix_bounds_numba,
            "indel_distance": _indel_distance_numba,
        }
    return impls
