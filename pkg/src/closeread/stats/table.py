"""Observation tables and design-matrix construction.

Categorical variables use treatment coding against a declared reference
level.  Continuous variables are internally divided by their population
standard deviation before fitting, which makes the optimizer's path
independent of the covariate's unit of measure; the fitted coefficients
are mapped back to the original scale through the (diagonal) scale map,
so callers never see the internal representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError
from .formula import Formula, Term


@dataclass
class ObservationTable:
    """Column-oriented data with declared categorical levels."""

    columns: dict                      # name -> list/array of values
    levels: dict = field(default_factory=dict)  # categorical name -> levels,
                                                # first entry = reference
    n: int = 0

    @classmethod
    def from_rows(cls, rows, reference: dict | None = None) -> "ObservationTable":
        rows = list(rows)
        if not rows:
            raise ArgumentError("no observations")
        names = list(rows[0])
        columns = {k: [r[k] for r in rows] for k in names}
        levels = {}
        for k, vals in columns.items():
            if any(isinstance(v, str) for v in vals):
                lv = sorted(set(vals))
                ref = (reference or {}).get(k)
                if ref is not None:
                    if ref not in lv:
                        raise ArgumentError(
                            f"reference {ref!r} is not a level of {k!r}")
                    lv.remove(ref)
                    lv.insert(0, ref)
                levels[k] = lv
        return cls(columns, levels, len(rows))

    def column(self, name: str):
        if name not in self.columns:
            raise ArgumentError(f"no column {name!r}")
        return self.columns[name]

    def outcome(self, name: str) -> np.ndarray:
        vals = self.column(name)
        if any(v is None for v in vals):
            raise ArgumentError(f"outcome {name!r} has missing values")
        y = np.asarray([1.0 if v in (True, 1) else 0.0 for v in vals])
        return y

    def is_categorical(self, name: str) -> bool:
        return name in self.levels


@dataclass
class Design:
    X: np.ndarray                  # n x p, internally scaled columns
    names: list                    # column names, "(Intercept)" first
    scale: np.ndarray              # per-column divisor: original = internal/scale
    z_index: dict                  # group -> int array of level indices per row
    z_levels: dict                 # group -> ordered level names

    @property
    def n_groups(self) -> dict:
        return {g: len(lv) for g, lv in self.z_levels.items()}


def _dummy_columns(table: ObservationTable, name: str):
    """Treatment-coded indicator columns for a categorical variable."""
    levels = table.levels[name]
    vals = table.column(name)
    cols = []
    for level in levels[1:]:
        cols.append((f"{name}={level}",
                     np.asarray([1.0 if v == level else 0.0 for v in vals])))
    return cols


def _continuous_column(table: ObservationTable, name: str):
    vals = np.asarray(table.column(name), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise ArgumentError(f"covariate {name!r} has non-finite values")
    return vals


def _term_columns(table: ObservationTable, term: Term):
    """All design columns for one term: (name, values, sd_divisor)."""
    parts = [("", np.ones(table.n), 1.0)]
    for var in term.variables:
        new = []
        if table.is_categorical(var):
            options = _dummy_columns(table, var)
        else:
            col = _continuous_column(table, var)
            sd = float(np.std(col))
            options = [(var, col)]
        for pname, pvals, pscale in parts:
            for cname, cvals in options:
                label = f"{pname}:{cname}" if pname else cname
                scale = pscale if table.is_categorical(var) else pscale * (sd if sd > 0 else 1.0)
                new.append((label, pvals * cvals, scale))
        parts = new
    return parts


def build_design(table: ObservationTable, formula: Formula) -> Design:
    names = ["(Intercept)"]
    cols = [np.ones(table.n)]
    scales = [1.0]
    for term in formula.fixed:
        for label, vals, scale in _term_columns(table, term):
            if label in names:
                continue  # a*b overlap: term already contributed
            names.append(label)
            cols.append(vals / scale if scale != 1.0 else vals)
            scales.append(scale)
    X = np.column_stack(cols)

    z_index = {}
    z_levels = {}
    for g in formula.groups:
        vals = table.column(g)
        levels = sorted({str(v) for v in vals})
        lut = {lv: i for i, lv in enumerate(levels)}
        z_index[g] = np.asarray([lut[str(v)] for v in vals], dtype=np.int64)
        z_levels[g] = levels
    return Design(X, names, np.asarray(scales), z_index, z_levels)
