"""Brute-force ground truth: dense attractor samples and box-count slopes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, WindowTooFine

SAMPLE_BUDGET = 50_000_000


@dataclass
class SampleSet:
    points: np.ndarray       # sorted float samples
    eps: float
    source: str
    hull: tuple              # (lo, hi) floats


@dataclass
class BoxCountFit:
    scales: list
    counts: list
    slope: float
    r2: float
    window: tuple


def _dedup_grid(points, cell):
    """Keep one representative per grid cell of the given size."""
    if cell <= 0 or points.size == 0:
        return np.unique(points)
    snapped = np.unique(np.round(points / cell))
    return snapped * cell


def sample_attractor(ifs, eps, budget=SAMPLE_BUDGET) -> SampleSet:
    """Midpoints of all cylinders refined until their diameter is <= eps."""
    from .systems import attractor_hull

    if eps <= 0:
        raise WindowTooFine("eps must be positive")
    ctx = ifs.ctx
    hull = attractor_hull(ifs)
    lo = ctx.to_float(hull.lo)
    hi = ctx.to_float(hull.hi)
    width = hi - lo
    ratios = np.array([ctx.to_float(ctx.power_of_beta(-m.n)) for m in ifs.maps])
    trans = np.array([ctx.to_float(m.a) for m in ifs.maps])

    scales = np.array([1.0])
    offsets = np.array([0.0])
    done_offsets = []
    done_scales = []
    while scales.size:
        finished = scales * width <= eps
        if np.any(finished):
            done_offsets.append(offsets[finished])
            done_scales.append(scales[finished])
            offsets, scales = offsets[~finished], scales[~finished]
        if not scales.size:
            break
        if scales.size * len(ratios) > budget:
            raise BudgetExceeded("cylinder expansion exceeds the sample budget")
        offsets = (offsets[:, None] + scales[:, None] * trans[None, :]).ravel()
        scales = (scales[:, None] * ratios[None, :]).ravel()
    mids = np.concatenate([o + s * (lo + width / 2)
                           for o, s in zip(done_offsets, done_scales)]) \
        if done_offsets else np.array([lo + width / 2])
    pts = np.sort(_dedup_grid(mids, eps / 2))
    return SampleSet(pts, eps, "attractor", (lo, hi))


def sum_samples(p1: SampleSet, p2: SampleSet, s, budget=SAMPLE_BUDGET) -> SampleSet:
    """All pairwise x + s*y, deduplicated at the combined resolution."""
    s = float(s)
    n = p1.points.size * p2.points.size
    if n > budget:
        raise BudgetExceeded(f"{n} pairwise sums exceed the budget")
    eps = p1.eps + abs(s) * p2.eps
    cell = eps / 2
    chunks = []
    step = max(1, int(5e6 / max(1, p2.points.size)))
    scaled = s * p2.points
    for start in range(0, p1.points.size, step):
        block = (p1.points[start:start + step, None] + scaled[None, :]).ravel()
        chunks.append(np.unique(np.round(block / cell)) if cell > 0 else np.unique(block))
    merged = np.unique(np.concatenate(chunks)) if chunks else np.array([])
    pts = merged * cell if cell > 0 else merged
    lo = p1.hull[0] + (s * p2.hull[0] if s >= 0 else s * p2.hull[1])
    hi = p1.hull[1] + (s * p2.hull[1] if s >= 0 else s * p2.hull[0])
    return SampleSet(np.sort(pts), eps, "sumset", (lo, hi))


def box_dimension_estimate(samples: SampleSet, window=None) -> BoxCountFit:
    """Least-squares slope of log N(scale) against log(1/scale).

    Boxes are anchored at the hull's left endpoint.  The default window runs
    from |hull|/2**4 down to max(4*eps, |hull|/2**14), halving each step.
    """
    lo, hi = samples.hull
    width = hi - lo
    if width <= 0:
        return BoxCountFit([], [], 0.0, 1.0, (0.0, 0.0))
    if window is None:
        top = width / 2**4
        bottom = max(4 * samples.eps, width / 2**14)
    else:
        top, bottom = max(window), min(window)
        if bottom < 4 * samples.eps:
            raise WindowTooFine("window extends below four sample resolutions")
    scales = []
    scale = top
    while scale >= bottom and len(scales) < 60:
        scales.append(scale)
        scale /= 2
    if len(scales) < 2:
        raise WindowTooFine("fewer than two usable scales")
    counts = []
    for scale in scales:
        counts.append(int(np.unique(np.floor((samples.points - lo) / scale)).size))
    xs = np.log(1.0 / np.array(scales))
    ys = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return BoxCountFit([float(s) for s in scales], counts, float(slope), r2,
                       (float(scales[0]), float(scales[-1])))
