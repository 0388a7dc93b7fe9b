"""Dimension solvers and separation certificates.

Upper bounds come from similarity-dimension equations over the matching
counts, solved either from truncated sums, from a tail-majorized bracket, or
exactly from the rational generating function.  Lower bounds come from
disjoint subsystems.  The open set condition is checked pairwise with exact
arithmetic on a finite prefix, and extended to the whole infinite system
through the geometric-family certificate when the automaton allows it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    CertificateUnavailable,
    DivergentTail,
    EmptyCounts,
    FieldError,
    NoRootInDomain,
    NotUniformRatio,
    TypesExceeded,
)
from .families import GeoFamily, PathMap, extract_families
from .field import _peval
from .matcher import CountSeries, GapAutomaton
from .systems import Interval, Similitude, map_image


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundValue:
    value: float
    error: float
    method: str


@dataclass
class DimensionBracket:
    lower: BoundValue
    upper: BoundValue

    @property
    def collapsed(self):
        return self.lower.method == "osc-exact" and \
            abs(self.upper.value - self.lower.value) <= \
            self.lower.error + self.upper.error + 1e-15

    def as_dict(self):
        return {
            "lower": {"value": self.lower.value, "error": self.lower.error,
                      "method": self.lower.method},
            "upper": {"value": self.upper.value, "error": self.upper.error,
                      "method": self.upper.method},
        }


@dataclass
class OscReport:
    checked_maps: int
    overlapping_pairs: list
    open_set: Interval
    status: str               # "disjoint-up-to-cap" | "overlap-found"
    containment_ok: bool = True


# ---------------------------------------------------------------------------
# monotone bisection
# ---------------------------------------------------------------------------

def bisect_decreasing(fn, lo, hi, tol, max_iter=240):
    """Bracket the root of a decreasing function minus 1.

    Expects fn(lo) >= 1 >= fn(hi); returns (lo, hi) with hi - lo <= tol.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo < 1 or fhi > 1:
        raise FieldError("bisection bracket does not straddle the root")
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if fn(mid) >= 1:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi


def _beta_float(ctx):
    return ctx.to_float(ctx.beta) if ctx.is_exact else ctx.beta_value


# ---------------------------------------------------------------------------
# similarity-dimension equations
# ---------------------------------------------------------------------------

def _partial_sum(counts, log_beta, s):
    total = 0.0
    for length, c in enumerate(counts):
        if c:
            e = math.log(c) - length * s * log_beta
            total += math.exp(e) if e < 700 else math.inf
    return total

def _find_upper_start(fn, start=1.0):
    hi = start
    for _ in range(200):
        if fn(hi) < 1:
            return hi
        hi *= 2
    raise FieldError("similarity equation does not drop below 1")


def self_similar_dimension(ifs, tol=1e-12):
    """Root of sum beta**(-n_i s) = 1 for a plain finite IFS."""
    log_beta = math.log(_beta_float(ifs.ctx))
    lens = [m.n for m in ifs.maps]

    def fn(s):
        return sum(math.exp(-n * s * log_beta) for n in lens)

    if len(lens) == 1:
        return 0.0
    hi = _find_upper_start(fn)
    lo_root, hi_root = bisect_decreasing(fn, 0.0, hi, tol)
    return 0.5 * (lo_root + hi_root)


def similitude_similarity_dimension(ctx, sims, tol=1e-12):
    """Same equation over explicit similitudes (deduplicated maps)."""
    log_beta = math.log(_beta_float(ctx))
    lens = [s.length for s in sims]
    if len(lens) == 1:
        return 0.0

    def fn(s):
        return sum(math.exp(-n * s * log_beta) for n in lens)

    hi = _find_upper_start(fn)
    lo_root, hi_root = bisect_decreasing(fn, 0.0, hi, tol)
    return 0.5 * (lo_root + hi_root)


def similarity_dimension(counts: CountSeries, ctx, mode="tail-bounded",
                         tol=1e-10) -> BoundValue:
    """Upper-bound side from the path-count series.

    ``truncated`` solves the partial sum only and under-estimates the true
    root (flagged in the method tag).  ``tail-bounded`` majorizes the tail
    geometrically through the exact generating function, giving a certified
    two-sided bracket of the full root.
    """
    if not any(counts.counts):
        raise EmptyCounts("no matchings below the cap")
    beta = _beta_float(ctx)
    log_beta = math.log(beta)

    def partial(s):
        return _partial_sum(counts.counts, log_beta, s)

    if mode == "truncated":
        hi = _find_upper_start(partial)
        lo_root, hi_root = bisect_decreasing(partial, 0.0, hi, tol)
        return BoundValue(0.5 * (lo_root + hi_root),
                          0.5 * (hi_root - lo_root), "similarity-truncated")

    if mode != "tail-bounded":
        raise FieldError(f"unknown similarity mode {mode!r}")

    if counts.growth_lo >= Fraction(beta).limit_denominator(10**15):
        raise DivergentTail("count growth rate reaches beta")

    # geometric tail: coefficients are bounded by C(xh)/xh**l for xh below
    # the smallest pole, so the tail beyond lmax is at most
    # C(xh) * (y/xh)**(lmax+1) / (1 - y/xh) at y = beta**-s
    if counts.growth_hi > 0:
        xh = (Fraction(1) / counts.growth_hi) * Fraction(2**20 - 1, 2**20)
    else:
        xh = Fraction(1)  # finite language; any point below 1 works
        if _peval([Fraction(c) for c in counts.denominator], xh) == 0:
            xh = Fraction(9, 10)
    c_hat = float(_peval([Fraction(c) for c in counts.numerator], xh) /
                  _peval([Fraction(c) for c in counts.denominator], xh))
    c_hat = abs(c_hat) * (1 + 1e-12)
    xh_f = float(xh)
    lmax = counts.lmax

    def majorized(s):
        y = math.exp(-s * log_beta)
        if y >= xh_f:
            return math.inf
        ratio = y / xh_f
        tail = c_hat * ratio ** (lmax + 1) / (1 - ratio)
        return partial(s) + tail

    hi = _find_upper_start(majorized)
    lo1, hi1 = bisect_decreasing(partial, 0.0, hi, tol / 4)
    lo2, hi2 = bisect_decreasing(majorized, 0.0, hi, tol / 4)
    lower, upper = lo1, hi2
    return BoundValue(0.5 * (lower + upper), 0.5 * (upper - lower),
                      "similarity-tail-bounded")


# ---------------------------------------------------------------------------
# exact generating-function root
# ---------------------------------------------------------------------------

@dataclass
class GfRoot:
    s: float
    s_error: float
    x_lo: Fraction
    x_hi: Fraction
    length_gcd: int
    normalized_poly: list     # integer polynomial vanishing at y* = x*^gcd
    reciprocal_poly: list     # the same for 1/y*

    def as_dict(self):
        return {
            "s": self.s, "s_error": self.s_error,
            "x": float((self.x_lo + self.x_hi) / 2),
            "length_gcd": self.length_gcd,
            "normalized_poly": self.normalized_poly,
            "reciprocal_poly": self.reciprocal_poly,
        }


def _normalize_intpoly(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        return [0]
    g = 0
    for c in cs:
        g = math.gcd(g, abs(c))
    cs = [c // g for c in cs]
    if cs[-1] < 0:
        cs = [-c for c in cs]
    return cs


def solve_gf_dimension(counts: CountSeries, ctx, x_rel_tol=Fraction(1, 10**15)) -> GfRoot:
    """Exact root of C(x) = 1 inside the convergence domain.

    C is strictly increasing with nonnegative coefficients, so the root is
    unique; the bracket is maintained with exact rational arithmetic.  The
    returned polynomials certify the root after the substitution
    y = x**gcd of the block lengths.
    """
    p = [Fraction(c) for c in counts.numerator]
    q = [Fraction(c) for c in counts.denominator]

    def cval(x):
        return _peval(p, x) / _peval(q, x)

    if counts.growth_hi > 0:
        pole = Fraction(1) / counts.growth_hi
        hi = min(Fraction(1), pole * Fraction(2**20 - 1, 2**20))
    else:
        hi = Fraction(1)
    # expand toward the certified pole lower bound until C exceeds 1
    attempts = 0
    while cval(hi) < 1:
        if counts.growth_hi == 0 or hi >= 1:
            raise NoRootInDomain("generating function stays below 1 on (0, 1]")
        hi = hi + (pole - hi) / 2
        attempts += 1
        if attempts > 2000:
            raise NoRootInDomain("could not bracket the generating-function root")
    lo = hi / 2
    while cval(lo) >= 1:
        lo = lo / 2
    while hi - lo > lo * x_rel_tol:
        mid = (lo + hi) / 2
        if cval(mid) >= 1:
            hi = mid
        else:
            lo = mid

    beta = _beta_float(ctx)
    log_beta = math.log(beta)
    s_lo = -math.log(float(hi)) / log_beta
    s_hi = -math.log(float(lo)) / log_beta
    g = counts.length_gcd

    # polynomial in y = x**g satisfied by the root: P_y(y) - Q_y(y) = 0
    def fold(cs):
        out = [0] * ((len(cs) + g - 1) // g)
        for k, c in enumerate(cs):
            if c:
                if k % g:
                    raise FieldError("length gcd does not divide an exponent")
                out[k // g] += int(c)
        return out

    py, qy = fold(counts.numerator), fold(counts.denominator)
    n = max(len(py), len(qy))
    diff = [(py[i] if i < len(py) else 0) - (qy[i] if i < len(qy) else 0)
            for i in range(n)]
    npoly = _normalize_intpoly(diff)
    rpoly = _normalize_intpoly(diff[::-1])
    return GfRoot(0.5 * (s_lo + s_hi), 0.5 * (s_hi - s_lo) + 1e-14,
                  lo, hi, g, npoly, rpoly)


# ---------------------------------------------------------------------------
# open set condition, finite prefix
# ---------------------------------------------------------------------------

def check_osc(maps, open_set: Interval) -> OscReport:
    """Pairwise interior disjointness of map images of the open interval.

    Touching closed endpoints is allowed.  Also checks every image stays in
    the closure of the open set.  Exact arithmetic throughout; the verdict
    covers only the maps supplied.
    """
    ctx = open_set.ctx
    images = [map_image(m, open_set) for m in maps]
    overlapping = []
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            a, b = images[i], images[j]
            lo = a.lo if ctx.compare(a.lo, b.lo) >= 0 else b.lo
            hi = a.hi if ctx.compare(a.hi, b.hi) <= 0 else b.hi
            if ctx.compare(lo, hi) < 0:
                overlapping.append((i, j))
    contained = all(
        ctx.compare(img.lo, open_set.lo) >= 0 and
        ctx.compare(img.hi, open_set.hi) <= 0
        for img in images)
    status = "overlap-found" if overlapping else "disjoint-up-to-cap"
    return OscReport(len(maps), overlapping, open_set, status, contained)


# ---------------------------------------------------------------------------
# separation certificate for the whole infinite family
# ---------------------------------------------------------------------------

@dataclass
class _Tail:
    family: GeoFamily
    peel: int = 0

    def params(self, ctx, width0):
        q = ctx.power_of_beta(-self.family.period)
        scale = q ** self.peel
        kappa = self.family.kappa * scale
        w = width0 * ctx.power_of_beta(-self.family.base_length) * scale
        return kappa, w, q

    def first_interval(self, ctx, width0):
        j = self.peel
        t = self.family.translation(ctx, j)
        w = width0 * ctx.power_of_beta(-(self.family.base_length + j * self.family.period))
        return t, t + w


@dataclass
class CertificateResult:
    certified: bool
    reason: str
    overlap_witness: tuple | None = None
    peeled_rounds: int = 0


def certify_separation(ctx, auto: GapAutomaton, hull: Interval,
                       max_rounds=120) -> CertificateResult:
    """Try to prove interior disjointness of every first-return map image.

    Works on the closed-form family decomposition: explicit intervals for
    acyclic maps and peeled family heads, exact n-independent inequalities
    inside each shared-limit group of geometric families, and hull
    comparisons between groups.  Conservative: any unresolved conflict after
    peeling reports no certificate rather than a wrong one.
    """
    width0 = hull.width()
    if ctx.sign(width0) == 0:
        return CertificateResult(True, "degenerate-hull")
    split = extract_families(ctx, auto)
    if split is None:
        return CertificateResult(False, "automaton-not-single-cycle")
    paths, families = split

    explicit = []
    for pm in paths:
        lo = pm.value
        hi = pm.value + width0 * ctx.power_of_beta(-pm.length)
        explicit.append((lo, hi))
    seen = set()
    for lo, hi in explicit:
        key = (ctx.dedup_key(lo), ctx.dedup_key(hi))
        if key in seen:
            return CertificateResult(False, "duplicate-map",
                                     (float(ctx.to_float(lo)), float(ctx.to_float(hi))))
        seen.add(key)

    tails = [_Tail(f) for f in families]

    def overlap(a, b):
        lo = a[0] if ctx.compare(a[0], b[0]) >= 0 else b[0]
        hi = a[1] if ctx.compare(a[1], b[1]) <= 0 else b[1]
        return ctx.compare(lo, hi) < 0

    for round_no in range(max_rounds):
        conflicts = []

        # explicit pairwise: a genuine overlap cannot be peeled away
        for i in range(len(explicit)):
            for j in range(i + 1, len(explicit)):
                if overlap(explicit[i], explicit[j]):
                    return CertificateResult(
                        False, "explicit-overlap",
                        (ctx.to_float(explicit[i][0]), ctx.to_float(explicit[j][0])),
                        round_no)

        # group families by exact limit (the period is common by construction)
        groups = {}
        for t in tails:
            groups.setdefault(ctx.dedup_key(t.family.limit), []).append(t)

        hulls = {}
        for key, members in groups.items():
            limit = members[0].family.limit
            lo = hi = limit
            for t in members:
                a, b = t.first_interval(ctx, width0)
                if ctx.compare(a, lo) < 0:
                    lo = a
                if ctx.compare(b, hi) > 0:
                    hi = b
            hulls[key] = (lo, hi, members)

        # inside a group: one generation must interleave consistently and
        # reproduce itself scaled by q, which is a j-independent condition
        for key, (glo, ghi, members) in hulls.items():
            pos, neg = [], []
            for t in members:
                kappa, w, q = t.params(ctx, width0)
                sgn = ctx.sign(kappa)
                if sgn > 0:
                    pos.append((kappa, w, q, t))
                elif sgn < 0:
                    neg.append((-kappa, w, q, t))
                else:
                    return CertificateResult(False, "nested-family",
                                             (ctx.to_float(t.family.limit), 0.0),
                                             round_no)

            def sort_desc(side):
                import functools
                side.sort(key=functools.cmp_to_key(
                    lambda r1, r2: ctx.compare(r1[0], r2[0])), reverse=True)

            ok = True
            if pos:
                # members approach the limit from the left
                sort_desc(pos)
                q = pos[0][2]
                for (k1, w1, _, _), (k2, _, _, _) in zip(pos, pos[1:]):
                    if ctx.compare(k1 - w1, k2) < 0:
                        ok = False
                klast, wlast = pos[-1][0], pos[-1][1]
                if ctx.compare(klast - wlast, q * pos[0][0]) < 0:
                    ok = False
            if ok and neg:
                # mirrored: members approach the limit from the right
                sort_desc(neg)
                q = neg[0][2]
                for (k1, _, _, _), (k2, w2, _, _) in zip(neg, neg[1:]):
                    if ctx.compare(k1, k2 + w2) < 0:
                        ok = False
                kfirst, wfirst = neg[0][0], neg[0][1]
                if ctx.compare(neg[-1][0], q * (kfirst + wfirst)) < 0:
                    ok = False
            if not ok:
                witness = (pos or neg)[0][3]
                return CertificateResult(
                    False, "family-interleave-overlap",
                    (ctx.to_float(witness.family.limit), 0.0), round_no)

        # group hull inside the ambient hull
        for key, (glo, ghi, members) in hulls.items():
            if ctx.compare(glo, hull.lo) < 0 or ctx.compare(ghi, hull.hi) > 0:
                return CertificateResult(False, "family-escapes-hull", None, round_no)

        # explicit vs group hulls, and group vs group
        keys = list(hulls)
        for key in keys:
            glo, ghi, members = hulls[key]
            for e in explicit:
                if overlap(e, (glo, ghi)):
                    conflicts.append(key)
        for a in range(len(keys)):
            for bidx in range(a + 1, len(keys)):
                ka, kb = keys[a], keys[bidx]
                if overlap(hulls[ka][:2], hulls[kb][:2]):
                    conflicts.append(ka)
                    conflicts.append(kb)

        if not conflicts:
            return CertificateResult(True, "certified", None, round_no)

        marked = set(conflicts)
        for key in marked:
            for t in hulls[key][2]:
                a, b = t.first_interval(ctx, width0)
                explicit.append((a, b))
                t.peel += 1

    return CertificateResult(False, "peel-budget-exhausted", None, max_rounds)


# ---------------------------------------------------------------------------
# finite-type transfer matrix for a uniform-ratio system
# ---------------------------------------------------------------------------

@dataclass
class FiniteTypeResult:
    dimension: float
    radius: float
    radius_lo: float
    radius_hi: float
    n_types: int
    iterations: int


def finite_type_dimension(ctx, sims, hull: Interval, types_cap=10**4,
                          tol=1e-9) -> FiniteTypeResult:
    """Neighborhood-type transfer-matrix dimension for one shared ratio.

    A type is the exact set of offsets, in units of the level's scale, of
    the same-level cylinders overlapping a given one.  Children are counted
    once, at their leftmost generating parent, and distinct child positions
    are deduplicated so the spectral radius tracks distinct cylinders.
    """
    lengths = {s.length for s in sims}
    if len(lengths) != 1:
        raise NotUniformRatio("finite-type needs a single shared contraction")
    k = lengths.pop()
    width = hull.width()
    if ctx.sign(width) == 0:
        return FiniteTypeResult(0.0, 1.0, 1.0, 1.0, 1, 0)
    scale_up = ctx.power_of_beta(k)
    shrink = ctx.power_of_beta(-k)
    # leftmost point of each child inside the parent, in parent-scale units
    anchors = [s.t + (shrink - ctx.one) * hull.lo for s in sims]

    root = frozenset([ctx.dedup_key(ctx.zero)])
    type_values = {root: {ctx.dedup_key(ctx.zero): ctx.zero}}
    order = [root]
    transitions = {}
    frontier = [root]
    while frontier:
        if len(order) > types_cap:
            raise TypesExceeded(f"more than {types_cap} neighborhood types")
        new_frontier = []
        for tp in frontier:
            offsets = list(type_values[tp].values())
            # candidate child positions from every neighbor, deduplicated
            positions = {}
            for delta in offsets:
                for anchor in anchors:
                    posv = delta + anchor
                    positions.setdefault(ctx.dedup_key(posv), posv)
            row = {}
            for anchor in anchors:
                key_a = ctx.dedup_key(anchor)
                owned = True
                for delta in offsets:
                    if ctx.sign(delta) < 0:
                        for other in anchors:
                            if ctx.dedup_key(delta + other) == key_a:
                                owned = False
                                break
                    if not owned:
                        break
                if not owned:
                    continue
                child = {}
                for posv in positions.values():
                    rel = scale_up * (posv - anchor)
                    if ctx.compare(rel, -width) > 0 and ctx.compare(rel, width) < 0:
                        child[ctx.dedup_key(rel)] = rel
                child_key = frozenset(child)
                if child_key not in type_values:
                    type_values[child_key] = child
                    order.append(child_key)
                    new_frontier.append(child_key)
                row[child_key] = row.get(child_key, 0) + 1
            transitions[tp] = row
        frontier = new_frontier

    n = len(order)
    index = {tp: i for i, tp in enumerate(order)}
    mat = np.zeros((n, n))
    for tp, row in transitions.items():
        for child_key, cnt in row.items():
            mat[index[tp], index[child_key]] += cnt

    # power iteration with Collatz-Wielandt bounds on the transpose action
    x = np.ones(n)
    lo_b, hi_b = 0.0, math.inf
    iters = 0
    for iters in range(1, 20001):
        y = mat.T @ x
        mask = x > 0
        ratios = y[mask] / x[mask]
        lo_b, hi_b = float(ratios.min()), float(ratios.max())
        if hi_b - lo_b <= tol:
            break
        norm = y.max()
        if norm == 0:
            lo_b = hi_b = 0.0
            break
        x = y / norm
        x = np.maximum(x, 1e-300)
    radius = 0.5 * (lo_b + hi_b)
    if hi_b - lo_b > tol:
        radius = float(max(abs(np.linalg.eigvals(mat))))
    log_beta = math.log(_beta_float(ctx))
    dim = math.log(radius) / (k * log_beta) if radius > 0 else 0.0
    return FiniteTypeResult(dim, radius, lo_b, hi_b, n, iters)


# ---------------------------------------------------------------------------
# bracket assembly helpers
# ---------------------------------------------------------------------------

def greedy_disjoint_prefix(ctx, maps, open_set: Interval):
    """Indices of a maximal prefix-greedy pairwise-disjoint subfamily."""
    chosen = []
    images = []
    for idx, m in enumerate(maps):
        img = map_image(m, open_set)
        clash = False
        for other in images:
            lo = img.lo if ctx.compare(img.lo, other.lo) >= 0 else other.lo
            hi = img.hi if ctx.compare(img.hi, other.hi) <= 0 else other.hi
            if ctx.compare(lo, hi) < 0:
                clash = True
                break
        if not clash:
            chosen.append(idx)
            images.append(img)
    return chosen


def subsystem_dimension(ctx, lengths, tol=1e-9):
    """Root of sum beta**(-l t) = 1 over a list of lengths (with repeats)."""
    if not lengths:
        raise EmptyCounts("empty subsystem")
    if len(lengths) == 1:
        return 0.0
    log_beta = math.log(_beta_float(ctx))

    def fn(t):
        return sum(math.exp(-n * t * log_beta) for n in lengths)

    hi = _find_upper_start(fn)
    lo_r, hi_r = bisect_decreasing(fn, 0.0, hi, tol)
    return 0.5 * (lo_r + hi_r)
