"""Enumeration of irreducible matchings through a first-return gap automaton.

A matching is a digitwise sum A + B of two equal-length concatenations, one
from the first alphabet and one from the slope-scaled second alphabet, that
admits no earlier alignment point.  The automaton tracks the signed length
difference (gap) between the two streams: the behind stream advances, and a
matching closes exactly when the gap first returns to zero.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CapTooSmall, EnumerationBudgetExceeded, FieldError
from .field import _peval, sturm_count
from .systems import Block, Similitude

SIDE_FIRST = 0   # advance the first alphabet's stream
SIDE_SECOND = 1  # advance the scaled second alphabet's stream


@dataclass(frozen=True)
class GapEdge:
    block_id: int
    side: int
    to_gap: int


@dataclass
class GapAutomaton:
    d1: tuple
    d2p: tuple
    states: tuple            # all reachable gaps, zero included
    initial: tuple           # (i, j, gap) for each starting pair
    edges: dict              # gap != 0 -> tuple of GapEdge
    length_gcd: int

    def nonzero_states(self):
        return tuple(g for g in self.states if g != 0)


def build_gap_automaton(d1, d2p) -> GapAutomaton:
    """Reachable gap states and advance edges for the two alphabets."""
    if not d1 or not d2p:
        raise FieldError("both alphabets must be nonempty")
    p_lens = [b.length for b in d1]
    q_lens = [b.length for b in d2p]
    initial = tuple((i, j, p - q) for i, p in enumerate(p_lens)
                    for j, q in enumerate(q_lens))
    edges = {}
    seen = {0}
    frontier = sorted({g for _, _, g in initial if g != 0})
    seen.update(frontier)
    while frontier:
        nxt = []
        for g in frontier:
            out = []
            if g < 0:
                for i, p in enumerate(p_lens):
                    out.append(GapEdge(i, SIDE_FIRST, g + p))
            else:
                for j, q in enumerate(q_lens):
                    out.append(GapEdge(j, SIDE_SECOND, g - q))
            edges[g] = tuple(out)
            for e in out:
                if e.to_gap != 0 and e.to_gap not in seen:
                    seen.add(e.to_gap)
                    nxt.append(e.to_gap)
        frontier = sorted(nxt)
    g = 0
    for n in p_lens + q_lens:
        g = math.gcd(g, n)
    return GapAutomaton(tuple(d1), tuple(d2p), tuple(sorted(seen)),
                        initial, edges, g)


def reachable_cycle_states(auto: GapAutomaton):
    """Nonzero states reachable from the start and co-reachable to zero."""
    reach = set()
    stack = [g for _, _, g in auto.initial if g != 0]
    while stack:
        g = stack.pop()
        if g in reach:
            continue
        reach.add(g)
        for e in auto.edges.get(g, ()):
            if e.to_gap != 0 and e.to_gap not in reach:
                stack.append(e.to_gap)
    rev = {g: set() for g in reach}
    closers = set()
    for g in reach:
        for e in auto.edges.get(g, ()):
            if e.to_gap == 0:
                closers.add(g)
            elif e.to_gap in reach:
                rev[e.to_gap].add(g)
    co = set()
    stack = list(closers)
    while stack:
        g = stack.pop()
        if g in co:
            continue
        co.add(g)
        stack.extend(rev[g] - co)
    return reach & co


def classify_finiteness(auto: GapAutomaton) -> str:
    """'finite' or 'infinite': infinite iff a useful nonzero cycle exists."""
    live = reachable_cycle_states(auto)
    out = {g: [e.to_gap for e in auto.edges.get(g, ()) if e.to_gap in live]
           for g in live}
    indeg = {g: 0 for g in live}
    for g in live:
        for h in out[g]:
            indeg[h] += 1
    queue = [g for g in live if indeg[g] == 0]
    removed = 0
    while queue:
        g = queue.pop()
        removed += 1
        for h in out[g]:
            indeg[h] -= 1
            if indeg[h] == 0:
                queue.append(h)
    return "infinite" if removed < len(live) else "finite"


def longest_finite_length(auto: GapAutomaton):
    """Longest matching length when the automaton is acyclic, else None."""
    if classify_finiteness(auto) == "infinite":
        return None
    p_lens = [b.length for b in auto.d1]
    q_lens = [b.length for b in auto.d2p]

    @functools.lru_cache(maxsize=None)
    def best(gap, longer):
        # longest closing length from (gap, current longer-stream length)
        out = None
        for e in auto.edges.get(gap, ()):
            if e.to_gap == 0:
                cand = longer
            elif (gap < 0) == (e.to_gap < 0):
                cand = best(e.to_gap, longer)
            else:
                cand = best(e.to_gap, longer + abs(e.to_gap))
            if cand is not None:
                out = cand if out is None else max(out, cand)
        return out

    overall = 0
    for i, j, g in auto.initial:
        if g == 0:
            overall = max(overall, p_lens[i])
        else:
            cand = best(g, max(p_lens[i], q_lens[j]))
            if cand is not None:
                overall = max(overall, cand)
    return overall


@dataclass(frozen=True)
class Matching:
    """An irreducible matching: summed block plus its two decompositions."""
    block: Block
    x_decomposition: tuple
    y_decomposition: tuple
    value: object

    @property
    def length(self):
        return self.block.length


@dataclass
class MatchingSet:
    matchings: list
    counts: list             # path counts per length, index = length
    dedup: dict              # (length, value key) -> index into matchings
    finiteness: str          # "finite" | "infinite"
    truncated: bool
    lmax: int

    def distinct_maps(self):
        """Deduplicated similitudes sorted by (length, translation)."""
        reps = [self.matchings[i] for i in self.dedup.values()]
        ctx = reps[0].block.ctx if reps else None
        if ctx is None:
            return []

        def cmp(a, b):
            if a.length != b.length:
                return -1 if a.length < b.length else 1
            return ctx.compare(a.value, b.value)

        reps.sort(key=functools.cmp_to_key(cmp))
        return [Similitude(ctx, m.length, m.value) for m in reps]

    def sorted_matchings(self):
        ctx = self.matchings[0].block.ctx if self.matchings else None

        def cmp(a, b):
            if a.length != b.length:
                return -1 if a.length < b.length else 1
            c = ctx.compare(a.value, b.value)
            if c:
                return c
            return -1 if (a.x_decomposition, a.y_decomposition) < \
                         (b.x_decomposition, b.y_decomposition) else 1

        return sorted(self.matchings, key=functools.cmp_to_key(cmp))


def enumerate_matchings(d1, d2p, lmax, max_paths=None) -> MatchingSet:
    """Depth-first search over decomposition pairs up to total length lmax.

    The behind stream always advances; a branch emits a matching and stops
    the first time both streams have equal length.  Path counts are kept per
    length before deduplication, and representatives are deduplicated by
    (length, exact translation value).
    """
    ctx = d1[0].ctx
    maxblock = max(b.length for b in list(d1) + list(d2p))
    if lmax < maxblock:
        raise CapTooSmall(f"lmax {lmax} below longest block {maxblock}")

    auto = build_gap_automaton(d1, d2p)
    counts = [0] * (lmax + 1)
    matchings = []
    dedup = {}

    def emit(x_ids, y_ids, digits, length):
        if max_paths is not None and len(matchings) >= max_paths:
            raise EnumerationBudgetExceeded(
                f"more than {max_paths} matchings below length {lmax}")
        merged = {}
        for pos, val in digits:
            merged[pos] = merged.get(pos, ctx.zero) + val
        cleaned = tuple((p, v) for p, v in sorted(merged.items())
                        if ctx.sign(v) != 0)
        block = Block(ctx, length, cleaned)
        value = block.value()
        m = Matching(block, tuple(x_ids), tuple(y_ids), value)
        counts[length] += 1
        matchings.append(m)
        key = (length, ctx.dedup_key(value))
        dedup.setdefault(key, len(matchings) - 1)

    def place(block, offset):
        return [(offset + p, v) for p, v in block.digits]

    def walk(len1, len2, x_ids, y_ids, digits):
        if len1 < len2:
            source, side_len = d1, len1
        else:
            source, side_len = d2p, len2
        for k, blk in enumerate(source):
            new_len = side_len + blk.length
            added = place(blk, side_len)
            if len1 < len2:
                n1, n2 = new_len, len2
                xs, ys = x_ids + [k], y_ids
            else:
                n1, n2 = len1, new_len
                xs, ys = x_ids, y_ids + [k]
            if max(n1, n2) > lmax:
                continue
            if n1 == n2:
                emit(xs, ys, digits + added, n1)
            else:
                walk(n1, n2, xs, ys, digits + added)

    for i, p_blk in enumerate(d1):
        for j, q_blk in enumerate(d2p):
            digits = place(p_blk, 0) + place(q_blk, 0)
            if p_blk.length == q_blk.length:
                emit([i], [j], digits, p_blk.length)
            elif max(p_blk.length, q_blk.length) <= lmax:
                walk(p_blk.length, q_blk.length, [i], [j], digits)

    finiteness = classify_finiteness(auto)
    if finiteness == "finite":
        truncated = (longest_finite_length(auto) or 0) > lmax
    else:
        truncated = True
    return MatchingSet(matchings, counts, dedup, finiteness, truncated, lmax)


def path_counts(auto: GapAutomaton, lmax) -> list:
    """First-return path counts per matching length by dynamic programming.

    Equal to the number of matchings the search emits at each length; counts
    decomposition pairs, not deduplicated maps.
    """
    p_lens = [b.length for b in auto.d1]
    q_lens = [b.length for b in auto.d2p]
    counts = [0] * (lmax + 1)
    # dp[longer_length][gap] = number of open paths
    dp = [dict() for _ in range(lmax + 1)]
    for i, j, g in auto.initial:
        if g == 0:
            if p_lens[i] <= lmax:
                counts[p_lens[i]] += 1
        else:
            top = max(p_lens[i], q_lens[j])
            if top <= lmax:
                dp[top][g] = dp[top].get(g, 0) + 1
    for length in range(lmax + 1):
        bucket = dp[length]
        if not bucket:
            continue
        # same-length moves drive the gap strictly toward zero on each side
        for g in sorted(k for k in bucket if k < 0):
            n = bucket.get(g, 0)
            if not n:
                continue
            for p in p_lens:
                g2 = g + p
                if g2 == 0:
                    counts[length] += n
                elif g2 < 0:
                    bucket[g2] = bucket.get(g2, 0) + n
                elif length + g2 <= lmax:
                    dp[length + g2][g2] = dp[length + g2].get(g2, 0) + n
        for g in sorted((k for k in bucket if k > 0), reverse=True):
            n = bucket.get(g, 0)
            if not n:
                continue
            for q in q_lens:
                g2 = g - q
                if g2 == 0:
                    counts[length] += n
                elif g2 > 0:
                    bucket[g2] = bucket.get(g2, 0) + n
                elif length - g2 <= lmax:
                    dp[length - g2][g2] = dp[length - g2].get(g2, 0) + n
    return counts


@dataclass
class CountSeries:
    """Path counts with their exact rational generating function.

    The generating function marks matching length, so its Taylor
    coefficients reproduce the counts exactly.  ``growth`` brackets the
    dominant growth rate, the reciprocal of the smallest positive pole.
    """
    counts: list
    numerator: list          # integer coefficients, constant first
    denominator: list
    length_gcd: int
    growth_lo: Fraction
    growth_hi: Fraction
    lmax: int

    @property
    def growth(self):
        return float((self.growth_lo + self.growth_hi) / 2)

    def series(self, n):
        """First n+1 Taylor coefficients of numerator/denominator, exact."""
        p, q = list(self.numerator), list(self.denominator)
        if not q or q[0] == 0:
            raise FieldError("generating function denominator has zero constant term")
        out = []
        for k in range(n + 1):
            acc = Fraction(p[k] if k < len(p) else 0)
            for j in range(1, min(k, len(q) - 1) + 1):
                acc -= q[j] * out[k - j]
            acc /= q[0]
            if acc.denominator != 1:
                raise FieldError("generating function series is not integral")
            out.append(int(acc))
        return out


def _gf_rational(auto: GapAutomaton):
    """Exact first-return generating function numerator/denominator."""
    import sympy

    x = sympy.Symbol("x")
    p_lens = [b.length for b in auto.d1]
    q_lens = [b.length for b in auto.d2p]
    live = sorted(reachable_cycle_states(auto))
    index = {g: k for k, g in enumerate(live)}
    n = len(live)

    direct = sympy.Integer(0)
    init = [sympy.Integer(0)] * n
    close = [sympy.Integer(0)] * n
    mat = [[sympy.Integer(0)] * n for _ in range(n)]
    for i, j, g in auto.initial:
        if g == 0:
            direct += x ** p_lens[i]
        elif g in index:
            init[index[g]] += x ** p_lens[i]
    for g in live:
        for e in auto.edges.get(g, ()):
            w = x ** p_lens[e.block_id] if e.side == SIDE_FIRST else sympy.Integer(1)
            if e.to_gap == 0:
                close[index[g]] += w
            elif e.to_gap in index:
                mat[index[g]][index[e.to_gap]] += w

    if n:
        A = sympy.eye(n) - sympy.Matrix(mat)
        v = A.solve(sympy.Matrix(close))
        total = direct + (sympy.Matrix([init]) * v)[0]
    else:
        total = direct
    total = sympy.cancel(sympy.together(sympy.expand(total)))
    num, den = sympy.fraction(total)
    p = sympy.Poly(num, x).all_coeffs()[::-1] if num != 0 else [sympy.Integer(0)]
    q = sympy.Poly(den, x).all_coeffs()[::-1]
    # clear any rational coefficients jointly, then make them plain ints
    p = [Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in p]
    q = [Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in q]
    scale = 1
    for c in p + q:
        scale = scale * c.denominator // math.gcd(scale, c.denominator)
    p = [int(c * scale) for c in p]
    q = [int(c * scale) for c in q]
    g = 0
    for c in p + q:
        g = math.gcd(g, abs(c))
    if g > 1:
        p = [c // g for c in p]
        q = [c // g for c in q]
    if q[0] < 0:
        p = [-c for c in p]
        q = [-c for c in q]
    return p, q


def _smallest_positive_root(poly, width=Fraction(1, 10**12)):
    """Bracket of the smallest positive real root of an integer polynomial.

    Returns None when there is no positive root.  Uses Sturm counts, so the
    bracket is certified.
    """
    cs = [Fraction(c) for c in poly]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return None
    bound = Fraction(1) + max(abs(c) for c in cs[:-1]) / abs(cs[-1])
    total = sturm_count(cs, Fraction(0), bound)
    if total == 0:
        return None
    lo, hi = Fraction(0), bound
    # keep the smallest root inside (lo, hi]
    while hi - lo > width:
        mid = (lo + hi) / 2
        if _peval(cs, mid) == 0:
            return (mid, mid)
        if sturm_count(cs, lo, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return (lo, hi)


def count_series(auto: GapAutomaton, lmax) -> CountSeries:
    """Counts by dynamic programming plus the exact rational closed form."""
    counts = path_counts(auto, lmax)
    p, q = _gf_rational(auto)
    root = _smallest_positive_root(q)
    if root is None:
        growth_lo = growth_hi = Fraction(0)
    else:
        lo, hi = root
        growth_lo = Fraction(1) / hi
        growth_hi = Fraction(1) / lo if lo > 0 else Fraction(10) ** 30
    return CountSeries(counts, p, q, auto.length_gcd, growth_lo, growth_hi, lmax)
