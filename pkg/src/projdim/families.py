"""Closed-form description of infinite matching families.

When the nonzero part of the gap automaton carries exactly one simple
cycle, every first-return path is an acyclic walk with some number of full
cycle insertions at its first cycle state.  Each such walk then generates
one geometric family of maps

    length_j = base_length + j * period
    translation_j = limit - kappa * beta**(-period * j)

which is what makes separation of the whole infinite system decidable.
"""
from __future__ import annotations

from dataclasses import dataclass

from .matcher import SIDE_FIRST, GapAutomaton, reachable_cycle_states


@dataclass(frozen=True)
class PathMap:
    """A single map from an acyclic first-return walk."""
    length: int
    value: object


@dataclass(frozen=True)
class GeoFamily:
    """Maps t_j = limit - kappa * q**j with lengths base_length + j*period."""
    base_length: int
    period: int
    limit: object
    kappa: object

    def translation(self, ctx, j):
        return self.limit - self.kappa * ctx.power_of_beta(-self.period * j)


def _find_simple_cycle(auto: GapAutomaton):
    """The unique simple cycle among live nonzero states, if there is one.

    Returns (cycle_states, successor_edge), with empty results when the live
    subgraph is acyclic; raises ValueError when the cycle structure is more
    complex than a single simple loop.
    """
    live = reachable_cycle_states(auto)
    out = {g: [e for e in auto.edges.get(g, ()) if e.to_gap in live] for g in live}
    core = set(live)
    changed = True
    while changed:
        changed = False
        for g in list(core):
            has_succ = any(e.to_gap in core for e in out[g])
            has_pred = any(any(e.to_gap == g for e in out[h]) for h in core)
            if not (has_succ and has_pred):
                core.discard(g)
                changed = True
    if not core:
        return frozenset(), {}
    succ_edge = {}
    for g in core:
        inside = [e for e in out[g] if e.to_gap in core]
        if len(inside) != 1:
            raise ValueError("multiple cycles through one state")
        succ_edge[g] = inside[0]
    start = next(iter(core))
    seen = {start}
    cur = succ_edge[start].to_gap
    while cur != start:
        if cur in seen:
            raise ValueError("core is not a single simple cycle")
        seen.add(cur)
        cur = succ_edge[cur].to_gap
    if len(seen) != len(core):
        raise ValueError("disconnected cycle core")
    return frozenset(core), succ_edge


def extract_families(ctx, auto: GapAutomaton):
    """Split the first-return language into acyclic maps and geometric families.

    Returns (paths, families), or None when the automaton is not of
    single-cycle shape (no closed-form certificate is attempted then).
    """
    try:
        cycle, succ_edge = _find_simple_cycle(auto)
    except ValueError:
        return None

    d1, d2p = auto.d1, auto.d2p

    def block_for(edge):
        return d1[edge.block_id] if edge.side == SIDE_FIRST else d2p[edge.block_id]

    def advance(state, edge):
        len1, len2, digits = state
        blk = block_for(edge)
        if edge.side == SIDE_FIRST:
            digits = digits + tuple((len1 + p, v) for p, v in blk.digits)
            len1 += blk.length
        else:
            digits = digits + tuple((len2 + p, v) for p, v in blk.digits)
            len2 += blk.length
        return (len1, len2, digits)

    def value_of(digits):
        total = ctx.zero
        for pos, val in digits:
            total = total + val * ctx.power_of_beta(-pos)
        return total

    def cycle_data(len1, len2, gap):
        """Length advance and digit value of one full loop from this gap."""
        state = (len1, len2, ())
        g = gap
        while True:
            e = succ_edge[g]
            state = advance(state, e)
            g = e.to_gap
            if g == gap:
                break
        assert state[0] - len1 == state[1] - len2
        return state[0] - len1, value_of(state[2])

    paths = []
    families = []

    def emit(state, mark):
        len1, len2, digits = state
        assert len1 == len2
        if mark is None:
            paths.append(PathMap(len1, value_of(digits)))
            return
        m_len1, m_len2, m_idx, m_gap = mark
        period, v_cycle = cycle_data(m_len1, m_len2, m_gap)
        q = ctx.power_of_beta(-period)
        stretched = v_cycle / (ctx.one - q)
        pre_value = value_of(digits[:m_idx])
        suf_value = value_of(digits[m_idx:])
        families.append(GeoFamily(len1, period,
                                  pre_value + stretched, stretched - suf_value))

    def walk(state, gap, mark, visited):
        for e in auto.edges.get(gap, ()):
            nstate = advance(state, e)
            nmark = mark
            if nmark is None and e.to_gap in cycle:
                nmark = (nstate[0], nstate[1], len(nstate[2]), e.to_gap)
            if e.to_gap == 0:
                emit(nstate, nmark)
            elif e.to_gap not in visited:
                visited.add(e.to_gap)
                walk(nstate, e.to_gap, nmark, visited)
                visited.discard(e.to_gap)

    for i, j, g in auto.initial:
        blk1, blk2 = d1[i], d2p[j]
        digits = tuple(blk1.digits) + tuple(blk2.digits)
        state = (blk1.length, blk2.length, digits)
        if g == 0:
            paths.append(PathMap(blk1.length, value_of(digits)))
            continue
        mark = (state[0], state[1], len(digits), g) if g in cycle else None
        walk(state, g, mark, {g})
    return paths, families
