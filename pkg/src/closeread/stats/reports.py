"""Log-standardization and the perplexity-quartile creativity report."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError


@dataclass
class StandardizeResult:
    values: np.ndarray      # same length as input; excluded entries are NaN
    n_excluded: int
    log_mean: float
    log_sd: float


def log_standardize(values, infinity_policy: str = "exclude") -> StandardizeResult:
    """Standardize log(values) to mean 0, sd 1 (population sd).

    Infinity-flagged entries are excluded and reported under the default
    policy, or raise under policy="error".  All-equal finite values have
    no spread to standardize and are an error.
    """
    if infinity_policy not in ("exclude", "error"):
        raise ArgumentError(f"unknown infinity policy {infinity_policy!r}")
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ArgumentError("no values to standardize")
    if np.any(arr <= 0):
        raise ArgumentError("values must be positive")
    infinite = np.isinf(arr)
    if infinite.any() and infinity_policy == "error":
        raise ArgumentError(f"{int(infinite.sum())} infinite value(s)")
    logs = np.log(arr[~infinite])
    if logs.size == 0:
        raise ArgumentError("no finite values to standardize")
    mean = float(np.mean(logs))
    sd = float(np.std(logs))
    if sd == 0.0:
        raise ArgumentError("standard deviation is zero; values all equal")
    out = np.full(arr.shape, np.nan)
    out[~infinite] = (logs - mean) / sd
    return StandardizeResult(out, int(infinite.sum()), mean, sd)


@dataclass
class QuartileReport:
    top_quartile_noncreative_share: float   # top-ppl quartile, no creative label
    creative_below_mean_share: float        # creative, ppl below the mean
    creative_lowest_quartile_share: float   # creative, lowest-ppl quartile
    q1: float
    q3: float
    mean: float
    n: int
    n_creative: int


def quartile_report(ppl_log_std, creative) -> QuartileReport:
    """Shares relating standardized log-perplexity to creative labels.

    Quartiles and the mean are computed over the full expression set; an
    expression is "creative" when at least one annotator judged it so.
    """
    v = np.asarray(list(ppl_log_std), dtype=np.float64)
    c = np.asarray(list(creative), dtype=bool)
    if v.shape != c.shape or v.size == 0:
        raise ArgumentError("need matching, non-empty values and labels")
    if np.any(~np.isfinite(v)):
        raise ArgumentError("ppl_log_std must be finite (exclude flagged rows)")
    q1, q3 = np.quantile(v, [0.25, 0.75])
    mean = float(np.mean(v))

    top = v >= q3
    share_top_noncreative = float(np.mean(~c[top])) if top.any() else 0.0

    n_creative = int(c.sum())
    if n_creative:
        share_below_mean = float(np.mean(v[c] < mean))
        share_lowest = float(np.mean(v[c] <= q1))
    else:
        share_below_mean = 0.0
        share_lowest = 0.0
    return QuartileReport(share_top_noncreative, share_below_mean,
                          share_lowest, float(q1), float(q3), mean,
                          int(v.size), n_creative)


def population_curve(fit, var: str, grid, at: dict | None = None):
    """Fixed-effects predicted-probability curve along one covariate.

    Returns [(x, p)] rows with every other covariate held at the values in
    `at` and random effects at zero — the plotting emitter for predicted
    probability figures.
    """
    from .glmm import predict_probability

    at = dict(at or {})
    rows = []
    for x in grid:
        row = dict(at)
        row[var] = float(x)
        rows.append(row)
    probs = predict_probability(fit, rows)
    return [(float(x), float(p)) for x, p in zip(grid, probs)]
