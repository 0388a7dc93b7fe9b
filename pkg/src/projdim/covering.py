"""Greedy Vitali selection of a disjoint composition subsystem.

Candidates are finite compositions of the level-one maps with image diameter
above a floor.  Processing in strictly non-increasing diameter order with a
largest-first greedy satisfies the half-sup admissibility rule with room to
spare; a composition whose image already lies inside a selected image is
pruned together with its whole subtree.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import EmptySelection, FieldError
from .dimension import subsystem_dimension
from .systems import Interval, Similitude, compose, map_image


@dataclass
class VitaliSelection:
    selected: list            # (Similitude, provenance word over map ids)
    diameter_floor: object
    hull: Interval
    rejected_overlaps: int
    max_length: int

    def lengths(self):
        return [s.length for s, _ in self.selected]


def _max_length_for_floor(ctx, hull_width, floor):
    """Largest composition length whose image diameter stays >= floor."""
    if ctx.sign(floor) <= 0:
        raise FieldError("diameter floor must be positive")
    length = 0
    width = hull_width
    shrink = ctx.power_of_beta(-1)
    while ctx.compare(width * shrink, floor) >= 0:
        width = width * shrink
        length += 1
        if length > 100000:
            raise FieldError("diameter floor unreachably small")
    return length


def vitali_select(ctx, maps, hull: Interval, floor) -> VitaliSelection:
    """Largest-first greedy over compositions with diameter above the floor.

    Ties in diameter break by lexicographic provenance word, so runs are
    deterministic.  Selected images get pairwise disjoint interiors; a
    candidate overlapping a selected image without being contained in it is
    rejected but still expanded, since deeper compositions may fit gaps.
    """
    if not maps:
        raise EmptySelection("no maps supplied")
    floor = ctx.element(floor)
    width = hull.width()
    if ctx.sign(width) == 0:
        sim = maps[0]
        return VitaliSelection([(sim, (0,))], floor, hull, 0, sim.length)
    max_len = _max_length_for_floor(ctx, width, floor)

    selected = []
    selected_images = []
    rejected = 0
    heap = []
    for idx, m in enumerate(maps):
        if m.length <= max_len:
            heapq.heappush(heap, (m.length, (idx,), idx))
    base = {i: m for i, m in enumerate(maps)}
    sims = {}
    last_length = 0

    while heap:
        length, word, _ = heapq.heappop(heap)
        assert length >= last_length, "greedy order must be non-increasing in diameter"
        last_length = length
        sim = sims.pop(word, None)
        if sim is None:
            sim = base[word[0]]
            for idx in word[1:]:
                sim = compose(sim, base[idx])
        img = map_image(sim, hull)
        contained = False
        overlapping = False
        for other in selected_images:
            lo = img.lo if ctx.compare(img.lo, other.lo) >= 0 else other.lo
            hi = img.hi if ctx.compare(img.hi, other.hi) <= 0 else other.hi
            if ctx.compare(lo, hi) < 0:
                overlapping = True
                if ctx.compare(img.lo, other.lo) >= 0 and \
                        ctx.compare(img.hi, other.hi) <= 0:
                    contained = True
                    break
        if contained:
            continue
        if overlapping:
            rejected += 1
        else:
            selected.append((sim, word))
            selected_images.append(img)
            continue
        # expand below a rejected candidate only
        for idx, m in base.items():
            nlen = length + m.length
            if nlen <= max_len:
                nword = word + (idx,)
                sims[nword] = compose(sim, m)
                heapq.heappush(heap, (nlen, nword, idx))

    return VitaliSelection(selected, floor, hull, rejected, max_len)


def lower_bound_dimension(ctx, selection: VitaliSelection, tol=1e-9) -> float:
    """Similarity root of the selected disjoint subsystem.

    The selected images have pairwise disjoint interiors inside the hull, so
    the subsystem is a genuine self-similar subset of the target and its
    similarity dimension bounds the Hausdorff dimension from below.
    """
    if not selection.selected:
        raise EmptySelection("empty selection")
    return subsystem_dimension(ctx, selection.lengths(), tol)
