"""Free-marginal multirater kappa.

kappa = (Po - 1/q) / (1 - 1/q), where Po is the mean over items of the
pairwise rater agreement  P_i = sum_j C(n_ij, 2) / C(n_i, 2)  and q is the
number of categories.  The pairwise form equals the category-count form on
complete data; it is fixed here so independent implementations agree
digit-for-digit.
"""

from __future__ import annotations

from math import comb

from ..errors import ArgumentError, IncompleteError
from .records import DIMENSIONS


def kappa_free_from_labels(item_labels, q: int = 2) -> float:
    """item_labels: iterable of per-item label lists (hashable labels)."""
    if q < 2:
        raise ArgumentError("q must be at least 2")
    items = [list(ls) for ls in item_labels]
    if not items:
        raise ArgumentError("no items to compute agreement over")
    po_sum = 0.0
    for labels in items:
        n = len(labels)
        if n < 2:
            raise ArgumentError("every item needs at least two ratings")
        counts: dict = {}
        for l in labels:
            counts[l] = counts.get(l, 0) + 1
        po_sum += sum(comb(c, 2) for c in counts.values()) / comb(n, 2)
    po = po_sum / len(items)
    return (po - 1.0 / q) / (1.0 - 1.0 / q)


def kappa_free(store, batch, dimension: str, q: int = 2) -> float:
    """Agreement across a batch's assigned annotators on one dimension.

    Every assigned annotator must have rated every pre-highlighted
    expression in the batch; otherwise the missing (annotator, expr)
    pairs are reported.
    """
    if dimension not in DIMENSIONS:
        raise ArgumentError(f"unknown dimension {dimension!r}")
    if isinstance(batch, str):
        batch = store.get_batch(batch)
    missing = store.missing_ratings(batch)
    if missing:
        raise IncompleteError(
            f"{len(missing)} rating(s) missing for batch {batch.batch_id!r}",
            missing=missing)
    spans = store.pre_highlighted(batch)
    by_expr: dict[str, list] = {s.expr_id: [] for s in spans}
    for r in store.live_ratings(set(by_expr)):
        if r.annotator_id in batch.assigned_annotators:
            by_expr[r.expr_id].append(getattr(r, dimension))
    return kappa_free_from_labels(by_expr.values(), q=q)
