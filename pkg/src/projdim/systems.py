"""Iterated function systems on the line with ratios that are powers of beta.

Maps have the form x -> x / beta**n + a.  Each map is identified with a
finite digit block whose value in base beta is the map's translation, and
longer blocks encode compositions.  This module holds the block algebra,
similitude composition, attractor hulls and the projection-angle reduction
of a product set to a weighted sumset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AngleOutOfRange, FieldError, MixedContexts

_HALF_PI_TOL = 1e-12


@dataclass(frozen=True)
class MapSpec:
    """One similitude x -> x / beta**n + a."""
    n: int
    a: object

    def __post_init__(self):
        if self.n < 1:
            raise FieldError("map exponent must be at least 1")


@dataclass
class IfsSpec:
    ctx: object
    maps: list

    def __post_init__(self):
        if not self.maps:
            raise FieldError("an IFS needs at least one map")
        self.maps = [MapSpec(m.n, self.ctx.element(m.a)) for m in self.maps]


@dataclass(frozen=True)
class Block:
    """A digit word of given length; omitted positions are zero digits."""
    ctx: object
    length: int
    digits: tuple  # ((position, value), ...), positions strictly increasing in 1..length

    def __post_init__(self):
        last = 0
        for pos, _ in self.digits:
            if not (last < pos <= self.length):
                raise FieldError("block digit positions must increase within 1..length")
            last = pos

    def value(self):
        """Base-beta value: the sum of digit * beta**(-position)."""
        total = self.ctx.zero
        for pos, val in self.digits:
            total = total + val * self.ctx.power_of_beta(-pos)
        return total

    def pattern(self):
        """Digit word as strings, zeros included, for display."""
        lookup = {pos: self.ctx.format(val) for pos, val in self.digits}
        return tuple(lookup.get(i, "0") for i in range(1, self.length + 1))


def make_block(ctx, length, digits):
    cleaned = tuple((int(pos), ctx.element(val)) for pos, val in sorted(digits)
                    if ctx.sign(val) != 0)
    return Block(ctx, int(length), cleaned)


@dataclass(frozen=True)
class Similitude:
    """x -> beta**(-length) * x + t."""
    ctx: object
    length: int
    t: object

    def ratio_float(self):
        return self.ctx.to_float(self.ctx.power_of_beta(-self.length)) \
            if self.ctx.is_exact else self.ctx.power_of_beta(-self.length)

    def apply(self, x):
        return self.ctx.power_of_beta(-self.length) * x + self.t


@dataclass(frozen=True)
class ProjectionForm:
    kind: str          # "slope" or "vertical-axis"
    slope: object = None


@dataclass(frozen=True)
class Interval:
    ctx: object
    lo: object
    hi: object

    def __post_init__(self):
        if self.ctx.compare(self.lo, self.hi) > 0:
            raise FieldError("interval endpoints out of order")

    def width(self):
        return self.hi - self.lo

    def midpoint_float(self):
        return 0.5 * (self.ctx.to_float(self.lo) + self.ctx.to_float(self.hi))


def _check_ctx(a, b):
    if a.ctx != b.ctx:
        raise MixedContexts("objects belong to different contexts")


def reduce_projection(ctx, theta_radians=None, slope=None):
    """Reduce a projection angle to sumset form.

    theta = pi/2 projects onto the vertical axis; every other angle in
    [0, pi) reduces to the sumset with slope tan(theta), which is similar to
    the projection (a cos-theta scaling that dimensions ignore).  Angle input
    yields a float slope, so exact analyses should supply the slope directly.
    """
    if (theta_radians is None) == (slope is None):
        raise AngleOutOfRange("give exactly one of theta_radians or slope")
    if slope is not None:
        return ProjectionForm("slope", ctx.element(slope))
    theta = float(theta_radians)
    if not (0 <= theta < math.pi):
        raise AngleOutOfRange(f"theta {theta} outside [0, pi)")
    if abs(theta - math.pi / 2) <= _HALF_PI_TOL:
        return ProjectionForm("vertical-axis")
    return ProjectionForm("slope", ctx.element(math.tan(theta)))


def block_of_map(ctx, m: MapSpec):
    """Digit block identified with the map: n-1 zeros then beta**n * a."""
    a = ctx.element(m.a)
    scaled = a * ctx.power_of_beta(m.n)
    if ctx.sign(scaled) == 0:
        return Block(ctx, m.n, ())
    return Block(ctx, m.n, ((m.n, scaled),))


def similitude_of_block(block: Block):
    return Similitude(block.ctx, block.length, block.value())


def scale_blocks(blocks, s):
    """Multiply every digit value by s; block lengths are unchanged."""
    out = []
    for b in blocks:
        out.append(make_block(b.ctx, b.length, ((p, v * s) for p, v in b.digits)))
    return out


def concat_blocks(a: Block, b: Block):
    _check_ctx(a, b)
    digits = list(a.digits) + [(a.length + p, v) for p, v in b.digits]
    return Block(a.ctx, a.length + b.length, tuple(digits))


def compose(f: Similitude, g: Similitude):
    """f after g: ratio exponents add, translation is t_f + beta**(-len_f) t_g."""
    _check_ctx(f, g)
    return Similitude(f.ctx, f.length + g.length,
                      f.t + f.ctx.power_of_beta(-f.length) * g.t)


def attractor_hull(ifs: IfsSpec) -> Interval:
    """Exact convex hull [m, M] of the attractor.

    The extremes of the attractor are fixed points of the extreme maps:
    each map contributes the candidate a / (1 - beta**(-n)), and the hull is
    spanned by the smallest and largest candidates.
    """
    ctx = ifs.ctx
    candidates = []
    for m in ifs.maps:
        r = ctx.power_of_beta(-m.n)
        candidates.append(m.a / (ctx.one - r))
    lo = hi = candidates[0]
    for c in candidates[1:]:
        if ctx.compare(c, lo) < 0:
            lo = c
        if ctx.compare(c, hi) > 0:
            hi = c
    return Interval(ctx, lo, hi)


def sum_hull(h1: Interval, h2: Interval, s) -> Interval:
    """Hull of K1 + s*K2 from the factor hulls; branches on the sign of s."""
    ctx = h1.ctx
    s = ctx.element(s)
    if ctx.sign(s) >= 0:
        return Interval(ctx, h1.lo + s * h2.lo, h1.hi + s * h2.hi)
    return Interval(ctx, h1.lo + s * h2.hi, h1.hi + s * h2.lo)


def map_image(sim: Similitude, hull: Interval) -> Interval:
    r = sim.ctx.power_of_beta(-sim.length)
    return Interval(sim.ctx, sim.t + r * hull.lo, sim.t + r * hull.hi)
