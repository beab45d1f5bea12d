"""Wald tests and source contrasts on fitted models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from ..errors import ArgumentError, FitError
from .glmm import ModelFit

Z95 = 1.959963984540054  # Phi^{-1}(0.975)


@dataclass
class HypothesisResult:
    estimate: float
    se: float
    chi2: float
    p: float
    contrast: dict


def linear_hypothesis(fit: ModelFit, contrast) -> HypothesisResult:
    """Wald test of c'beta = 0.

    contrast: dict of coefficient name -> weight, or a vector aligned
    with fit.coef_names.
    """
    if isinstance(contrast, dict):
        unknown = [k for k in contrast if k not in fit.coef]
        if unknown:
            raise ArgumentError(f"unknown coefficient(s) {unknown}")
        c = np.asarray([contrast.get(n, 0.0) for n in fit.coef_names])
        cdict = dict(contrast)
    else:
        c = np.asarray(contrast, dtype=float)
        if c.shape != (len(fit.coef_names),):
            raise ArgumentError(
                f"contrast needs {len(fit.coef_names)} entries, got {c.shape}")
        cdict = {n: w for n, w in zip(fit.coef_names, c) if w != 0.0}
    if not np.any(c):
        raise ArgumentError("contrast is all zeros")

    est = float(c @ fit.beta())
    var = float(c @ fit.vcov @ c)
    if var <= 0 or not math.isfinite(var):
        raise FitError("contrast variance is not positive; singular covariance")
    chi2 = est * est / var
    p = float(spstats.chi2.sf(chi2, df=1))
    return HypothesisResult(est, math.sqrt(var), chi2, p, cdict)


@dataclass
class ContrastRow:
    level: str
    reference: str
    log_odds: float
    se: float
    odds_ratio: float
    ci_low: float
    ci_high: float
    p: float


def source_contrasts(fit: ModelFit, factor: str) -> list[ContrastRow]:
    """Each non-reference level of a treatment-coded factor vs the reference.

    With no interactions touching the factor, the dummy coefficient IS the
    log odds ratio of that level against the reference.
    """
    prefix = f"{factor}="
    rows = []
    levels = fit.levels.get(factor)
    if levels is None:
        raise ArgumentError(f"fit has no categorical factor {factor!r}")
    reference = levels[0]
    rows.append(ContrastRow(reference, reference, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0))
    for name in fit.coef_names:
        if not name.startswith(prefix) or ":" in name:
            continue
        level = name[len(prefix):]
        b, s = fit.coef[name], fit.se[name]
        res = linear_hypothesis(fit, {name: 1.0})
        rows.append(ContrastRow(
            level, reference, b, s, math.exp(b),
            math.exp(b - Z95 * s), math.exp(b + Z95 * s), res.p))
    if len(rows) == 1:
        raise ArgumentError(f"no dummy coefficients found for {factor!r}")
    return rows
