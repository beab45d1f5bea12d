"""Model formula parsing: "y ~ a + b*c + a:d + (1|group)".

Supported grammar, in the style of the R mixed-model packages:
  response "~" term ("+" term)*
  term     = "(1|" name ")"            random intercept for a grouping factor
           | factor ("*" factor)+      crossed: mains plus all interactions
           | factor (":" factor)*      the interaction alone
           | "1"                       explicit intercept (always present anyway)
Variable names: letters/digits/underscore/dot, not starting with a digit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations

from ..errors import ArgumentError

_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_NAME_RE = re.compile(rf"^{_NAME}$")
_GROUP_RE = re.compile(rf"^\(\s*1\s*\|\s*({_NAME})\s*\)$")


@dataclass(frozen=True)
class Term:
    """One fixed-effect term: a tuple of variable names (len>1 = interaction)."""

    variables: tuple

    def __str__(self) -> str:
        return ":".join(self.variables)


@dataclass
class Formula:
    response: str
    fixed: list = field(default_factory=list)   # Terms, intercept implicit
    groups: list = field(default_factory=list)  # grouping-factor names
    text: str = ""

    def variables(self) -> set:
        out = {self.response, *self.groups}
        for t in self.fixed:
            out.update(t.variables)
        return out


def _expand_star(piece: str) -> list[tuple]:
    """a*b*c -> all non-empty subsets; a:b -> just (a, b)."""
    if "*" in piece:
        names = [p.strip() for p in piece.split("*")]
        subsets = []
        for r in range(1, len(names) + 1):
            subsets.extend(combinations(names, r))
        return subsets
    return [tuple(p.strip() for p in piece.split(":"))]


def parse_formula(text: str) -> Formula:
    if "~" not in text:
        raise ArgumentError("formula needs '~' between response and terms")
    lhs, rhs = text.split("~", 1)
    response = lhs.strip()
    if not _NAME_RE.match(response):
        raise ArgumentError(f"bad response name {response!r}")

    # split on + at depth 0 (parentheses protect the (1|g) terms)
    pieces = []
    depth = 0
    cur = ""
    for ch in rhs:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            pieces.append(cur)
            cur = ""
        else:
            cur += ch
    pieces.append(cur)

    fixed: list[Term] = []
    groups: list[str] = []
    for piece in (p.strip() for p in pieces):
        if not piece:
            raise ArgumentError("empty term in formula")
        m = _GROUP_RE.match(piece)
        if m:
            if m.group(1) in groups:
                raise ArgumentError(f"duplicate grouping factor {m.group(1)!r}")
            groups.append(m.group(1))
            continue
        if piece == "1":
            continue
        for combo in _expand_star(piece):
            for name in combo:
                if not _NAME_RE.match(name):
                    raise ArgumentError(f"bad variable name {name!r}")
            term = Term(combo)
            if term not in fixed:
                fixed.append(term)
    return Formula(response, fixed, groups, text.strip())
