"""Bundled reference configuration: two maps with ratio exponents 4 and 8.

The family K1 = K2 generated by x/beta**4 and (x + beta**8 - 1)/beta**8 is
the package's standing worked example.  This module knows its closed-form
facts: the six level-one separation thresholds in slope, the slope window on
which the whole infinite system is separated, the special slope where two
first-level images overlap through an exact composition identity, and the
expected matching list.  Everything here is derived per context, so any
beta > 1 can be examined.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

from .systems import (
    IfsSpec,
    MapSpec,
    attractor_hull,
    block_of_map,
    compose,
    scale_blocks,
    sum_hull,
)


def reference_ifs(ctx) -> IfsSpec:
    b8 = ctx.power_of_beta(8)
    return IfsSpec(ctx, [MapSpec(4, ctx.zero),
                         MapSpec(8, (b8 - ctx.one) / b8)])


def special_slope(ctx):
    """Slope at which the two length-8 and length-12 images share a cylinder.

    Equivalently the unique slope where composing the scaled length-8 map
    with the sum map equals composing the mixed length-12 map with the short
    map, so the open set condition must fail.
    """
    b4, b8 = ctx.power_of_beta(4), ctx.power_of_beta(8)
    return (b8 - ctx.one) / (b8 - b4 + ctx.one)


def separation_thresholds(ctx):
    """The six slope thresholds controlling level-one separations, printed order.

    Each entry is (threshold, relation, description); relation 'above' means
    the named pair of images is disjoint exactly when the slope exceeds the
    threshold, 'below' when it stays under it.
    """
    one = ctx.one
    b4, b8, b12 = (ctx.power_of_beta(k) for k in (4, 8, 12))
    bm4 = ctx.power_of_beta(-4)
    two = ctx.element(2)
    return [
        (b4 / (b8 - b4 - one), "above",
         "consecutive members within each tail family"),
        (b8 / (b8 - two), "above",
         "plain length-8 image versus its scaled twin"),
        ((b12 - b8 + one) / (b12 - b8 - b4), "above",
         "even family accumulation versus first odd member"),
        ((b12 - two * b4) / (b12 - b8 + one), "below",
         "scaled length-8 image versus first even length-12 member"),
        (b4 - bm4 - one, "below",
         "short image versus plain length-8 image, and family spacing"),
        (b8 - b4 - one, "below",
         "odd family versus the sum map"),
    ]


def threshold_chain(ctx):
    """Adjacent exact comparisons of the six thresholds in printed order.

    Returns a list of (i, j, holds) for consecutive pairs, 1-indexed.
    """
    values = [t for t, _, _ in separation_thresholds(ctx)]
    out = []
    for k in range(len(values) - 1):
        holds = ctx.compare(values[k], values[k + 1]) < 0
        out.append((k + 1, k + 2, holds))
    return out


def nominal_slope_window(ctx):
    """The published window (third threshold, fourth threshold)."""
    ts = separation_thresholds(ctx)
    return ts[2][0], ts[3][0]


def effective_slope_window(ctx):
    """Window where every level-one separation holds, from exact comparison.

    Takes the maximum of the 'above' thresholds and the minimum of the
    'below' ones; may be empty for small beta.  Returns (lo, hi, binding_lo,
    binding_hi) with 1-based indices of the binding thresholds.
    """
    ts = separation_thresholds(ctx)
    lo, lo_idx = None, None
    hi, hi_idx = None, None
    for k, (val, rel, _) in enumerate(ts):
        if rel == "above":
            if lo is None or ctx.compare(val, lo) > 0:
                lo, lo_idx = val, k + 1
        else:
            if hi is None or ctx.compare(val, hi) < 0:
                hi, hi_idx = val, k + 1
    return lo, hi, lo_idx, hi_idx


def midpoint_slope(ctx):
    lo, hi = nominal_slope_window(ctx)
    return (lo + hi) / ctx.element(2)


def reference_blocks(ctx, s):
    ifs = reference_ifs(ctx)
    d1 = [block_of_map(ctx, m) for m in ifs.maps]
    return d1, scale_blocks(d1, s)


def reference_hull(ctx, s):
    h = attractor_hull(reference_ifs(ctx))
    return sum_hull(h, h, s)


def expected_matchings(ctx, s):
    """The six shortest matchings as (length, digit tuple) pairs.

    Writing A for beta**8 - 1 and B for s*A, these are the zero block of
    length 4, the three length-8 blocks with digit A, B or A+B in the last
    position, and the two length-12 blocks mixing B and A at positions 8
    and 12.
    """
    A = ctx.power_of_beta(8) - ctx.one
    B = s * A
    C = A + B
    return [
        (4, ()),
        (8, ((8, A),)),
        (8, ((8, B),)),
        (8, ((8, C),)),
        (12, ((8, A), (12, B))),
        (12, ((8, B), (12, A))),
    ]


def overlap_identity_holds(ctx, s):
    """Exact check of the composition coincidence at the special slope.

    With h the scaled length-8 map, g the summed length-8 map, phi the mixed
    length-12 map and f the short map, h o g equals phi o f exactly at the
    special slope and only there.
    """
    from .systems import Similitude

    A = ctx.power_of_beta(8) - ctx.one
    B = s * A
    f = Similitude(ctx, 4, ctx.zero)
    h2 = Similitude(ctx, 8, B * ctx.power_of_beta(-8))
    g = Similitude(ctx, 8, (A + B) * ctx.power_of_beta(-8))
    phi2 = Similitude(ctx, 12, A * ctx.power_of_beta(-8) + B * ctx.power_of_beta(-12))
    left = compose(h2, g)
    right = compose(phi2, f)
    return left.length == right.length and ctx.is_zero(left.t - right.t)


def expected_selection_keys(ctx, maps, max_len):
    """Expected Vitali selection at the special slope, as (length, key) set.

    Everything except the mixed length-12 map, plus that map's power
    prefixes composed with every map other than itself and the short one,
    all truncated at max_len.
    """
    A = ctx.power_of_beta(8) - ctx.one
    B = special_slope(ctx) * A
    phi2_t = A * ctx.power_of_beta(-8) + B * ctx.power_of_beta(-12)
    phi2 = next(m for m in maps
                if m.length == 12 and ctx.is_zero(m.t - phi2_t))
    expected = set()
    for m in maps:
        if m.length <= max_len and not (m.length == 12 and ctx.is_zero(m.t - phi2_t)):
            expected.add((m.length, ctx.dedup_key(m.t)))
    prefix = phi2
    while prefix.length + 4 <= max_len:
        for m in maps:
            if m.length == 4 or (m.length == 12 and ctx.is_zero(m.t - phi2_t)):
                continue
            cand = compose(prefix, m)
            if cand.length <= max_len:
                expected.add((cand.length, ctx.dedup_key(cand.t)))
        prefix = compose(prefix, phi2)
    return expected
