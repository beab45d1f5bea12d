// Passage text atomization: split [0, textLen) at every pre-highlight and
// annotator-highlight boundary so each run renders with a single style.
// Pre-highlight spans never overlap each other (segmenter guarantee);
// annotator highlights may land anywhere, including across a pre-highlight.

export interface SpanLike {
  expr_id: string;
  char_start: number;
  char_end: number;
}

export interface RangeLike {
  start: number;
  end: number;
}

export interface Atom {
  start: number;
  end: number;
  exprId: string | null;
  green: boolean;
}

export function atomize(
  textLen: number,
  pre: SpanLike[],
  green: RangeLike[],
): Atom[] {
  const clamp = (x: number) => Math.max(0, Math.min(textLen, Math.trunc(x)));
  const cuts = new Set<number>([0, textLen]);
  for (const s of pre) {
    cuts.add(clamp(s.char_start));
    cuts.add(clamp(s.char_end));
  }
  for (const g of green) {
    cuts.add(clamp(g.start));
    cuts.add(clamp(g.end));
  }
  const edges = Array.from(cuts).sort((a, b) => a - b);

  const atoms: Atom[] = [];
  for (let i = 0; i + 1 < edges.length; i++) {
    const a = edges[i]!;
    const b = edges[i + 1]!;
    if (b <= a) continue;
    // atoms never straddle a cut, so containment of the left edge decides
    const owner = pre.find((s) => clamp(s.char_start) <= a && b <= clamp(s.char_end));
    atoms.push({
      start: a,
      end: b,
      exprId: owner ? owner.expr_id : null,
      green: green.some((g) => clamp(g.start) <= a && b <= clamp(g.end)),
    });
  }
  return atoms;
}

/** Does [start, end) intersect any pre-highlighted span? */
export function overlapsAny(pre: SpanLike[], start: number, end: number): boolean {
  return pre.some((s) => start < s.char_end && s.char_start < end);
}
