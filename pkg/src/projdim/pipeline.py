"""Full analysis pipeline: matchings, dimension bracket, oracle, report."""
from __future__ import annotations

import datetime
import math
from concurrent.futures import ThreadPoolExecutor

from .config import AnalysisConfig
from .covering import lower_bound_dimension, vitali_select
from .dimension import (
    BoundValue,
    DimensionBracket,
    certify_separation,
    check_osc,
    finite_type_dimension,
    greedy_disjoint_prefix,
    self_similar_dimension,
    similarity_dimension,
    similitude_similarity_dimension,
    solve_gf_dimension,
    subsystem_dimension,
)
from .errors import (
    BudgetExceeded,
    DivergentTail,
    EnumerationBudgetExceeded,
    NoRootInDomain,
    NotUniformRatio,
    ProjdimError,
    TypesExceeded,
)
from .matcher import build_gap_automaton, count_series, enumerate_matchings
from .oracle import box_dimension_estimate, sample_attractor, sum_samples
from .systems import attractor_hull, block_of_map, scale_blocks, sum_hull

REPORT_SCHEMA_ID = "projdim-report/1"


def _fmt(ctx, value):
    return ctx.format(value)


def run_analysis(cfg: AnalysisConfig) -> dict:
    """Deterministic end-to-end analysis of one configuration."""
    ctx = cfg.ctx
    opts = cfg.options
    warnings = list(cfg.warnings)

    ifs1, ifs2 = cfg.ifs1, cfg.ifs2
    if cfg.projection.kind == "vertical-axis":
        # the vertical projection is the second factor itself; analyze it as
        # a sumset with slope zero and the factors swapped
        ifs1, ifs2 = ifs2, ifs1
        slope = ctx.zero
        warnings.append({"code": "vertical-axis",
                         "detail": "projection equals the second factor set"})
    else:
        slope = cfg.projection.slope

    d1 = [block_of_map(ctx, m) for m in ifs1.maps]
    d2 = [block_of_map(ctx, m) for m in ifs2.maps]
    d2p = scale_blocks(d2, slope)
    auto = build_gap_automaton(d1, d2p)
    counts = count_series(auto, opts.lmax)

    matching_set = None
    maps = []
    try:
        matching_set = enumerate_matchings(d1, d2p, opts.lmax,
                                           max_paths=opts.max_paths)
        maps = matching_set.distinct_maps()
    except EnumerationBudgetExceeded:
        warnings.append({"code": "enumeration-budget",
                         "detail": "map enumeration skipped; counts only"})

    finiteness = matching_set.finiteness if matching_set else \
        ("finite" if counts_finite(auto) else "infinite")
    classification = "self-similar" if finiteness == "finite" else "infinite-ifs"

    hull1, hull2 = attractor_hull(ifs1), attractor_hull(ifs2)
    hull = sum_hull(hull1, hull2, slope)

    dim1 = self_similar_dimension(ifs1, opts.factor_tol)
    dim2 = self_similar_dimension(ifs2, opts.factor_tol)

    # upper side
    upper = None
    gf_root = None
    if opts.gf_exact:
        try:
            gf_root = solve_gf_dimension(counts, ctx)
            upper = BoundValue(gf_root.s, gf_root.s_error, "gf-exact")
        except (NoRootInDomain, ProjdimError) as exc:
            warnings.append({"code": "gf-root-unavailable", "detail": str(exc)})
    if upper is None:
        try:
            tb = similarity_dimension(counts, ctx, "tail-bounded", opts.dim_tol)
            upper = BoundValue(tb.value, tb.error, "similarity-dimension")
        except DivergentTail as exc:
            warnings.append({"code": "divergent-tail", "detail": str(exc)})
            upper = BoundValue(math.inf, math.inf, "similarity-dimension")

    complete_finite = (finiteness == "finite" and matching_set is not None
                       and not matching_set.truncated)
    if complete_finite and maps:
        dedup_root = similitude_similarity_dimension(ctx, maps, opts.dim_tol)
        if dedup_root <= upper.value:
            upper = BoundValue(dedup_root, opts.dim_tol, "similarity-dimension")

    # open set condition on a finite prefix, exact
    osc_cap = len(maps) if complete_finite else opts.osc_cap
    osc_maps = maps[:osc_cap]
    osc = check_osc(osc_maps, hull) if osc_maps else None

    # lower side, plus the collapse when separation is fully certified
    lower = None
    certificate = None
    if osc is not None and osc.status == "disjoint-up-to-cap" and osc.containment_ok:
        if complete_finite:
            lower = BoundValue(upper.value, upper.error, "osc-exact")
        else:
            certificate = certify_separation(ctx, auto, hull)
            if certificate.certified:
                lower = BoundValue(upper.value, upper.error, "osc-exact")
                warnings.append({
                    "code": "countable-exceptional-codings-assumed",
                    "detail": "equality of the sumset dimension with the "
                              "system attractor dimension assumes the "
                              "non-matching codings are negligible",
                })

    vit = None
    if lower is None and opts.vitali and maps:
        floor = ctx.element(opts.diameter_floor) if opts.diameter_floor is not None \
            else hull.width() * ctx.power_of_beta(-opts.floor_exponent)
        if ctx.sign(floor) > 0:
            vit = vitali_select(ctx, maps, hull, floor)
            if vit.selected:
                lb = lower_bound_dimension(ctx, vit, opts.dim_tol)
                lower = BoundValue(lb, opts.dim_tol, "vitali-subsystem")
    if lower is None and osc_maps:
        chosen = greedy_disjoint_prefix(ctx, osc_maps, hull)
        lengths = [osc_maps[i].length for i in chosen]
        lb = subsystem_dimension(ctx, lengths, opts.dim_tol) if lengths else 0.0
        lower = BoundValue(lb, opts.dim_tol, "truncation")
    if lower is None:
        lower = BoundValue(0.0, 0.0, "truncation")
    if lower.value > upper.value + lower.error + upper.error:
        lower = BoundValue(min(lower.value, upper.value), lower.error, lower.method)
    bracket = DimensionBracket(lower, upper)

    ftype = None
    if opts.finite_type and complete_finite and maps:
        try:
            res = finite_type_dimension(ctx, maps, hull)
            ftype = {"dimension": res.dimension, "radius": res.radius,
                     "radius_bounds": [res.radius_lo, res.radius_hi],
                     "types": res.n_types}
        except (NotUniformRatio, TypesExceeded) as exc:
            warnings.append({"code": "finite-type-unavailable", "detail": str(exc)})

    fit = None
    if opts.oracle:
        try:
            w1 = ctx.to_float(hull1.width())
            w2 = ctx.to_float(hull2.width())
            eps1 = opts.eps if opts.eps else max(w1, 1e-9) / 2**14
            eps2 = opts.eps if opts.eps else max(w2, 1e-9) / 2**14
            s1 = sample_attractor(ifs1, eps1)
            s2 = sample_attractor(ifs2, eps2)
            sums = sum_samples(s1, s2, ctx.to_float(slope))
            fit = box_dimension_estimate(sums)
        except (BudgetExceeded, ProjdimError) as exc:
            warnings.append({"code": "oracle-unavailable", "detail": str(exc)})

    counts_preview = [[length, c] for length, c in enumerate(counts.counts)
                      if c][:40]
    report = {
        "schema": REPORT_SCHEMA_ID,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "mode": "exact" if ctx.is_exact else "float",
        "projection": {
            "kind": cfg.projection.kind,
            "slope": _fmt(ctx, slope),
            "slope_float": ctx.to_float(slope),
        },
        "classification": classification,
        "matchings": {
            "finiteness": finiteness,
            "truncated": matching_set.truncated if matching_set else True,
            "lmax": opts.lmax,
            "path_counts": counts_preview,
            "distinct_maps": len(maps),
            "growth_rate": counts.growth,
        },
        "gf": gf_root.as_dict() if gf_root else None,
        "factors": {"dim1": dim1, "dim2": dim2, "sum": dim1 + dim2,
                    "marstrand_reference": min(1.0, dim1 + dim2)},
        "hull": [_fmt(ctx, hull.lo), _fmt(ctx, hull.hi)],
        "bracket": bracket.as_dict(),
        "osc": {
            "checked_maps": osc.checked_maps,
            "overlapping_pairs": [list(p) for p in osc.overlapping_pairs],
            "open_set": [_fmt(ctx, osc.open_set.lo), _fmt(ctx, osc.open_set.hi)],
            "status": osc.status,
            "containment_ok": osc.containment_ok,
        } if osc else None,
        "certificate": {
            "certified": certificate.certified,
            "reason": certificate.reason,
            "rounds": certificate.peeled_rounds,
        } if certificate else None,
        "finite_type": ftype,
        "vitali": {
            "selected": [
                {"length": sim.length, "translation": _fmt(ctx, sim.t),
                 "word": list(word)}
                for sim, word in vit.selected],
            "floor": ctx.to_float(vit.diameter_floor),
            "rejected_overlaps": vit.rejected_overlaps,
            "lower_bound": lower.value if lower.method == "vitali-subsystem" else None,
        } if vit else None,
        "oracle": {
            "scales": fit.scales, "counts": fit.counts,
            "slope": fit.slope, "r2": fit.r2, "window": list(fit.window),
        } if fit else None,
        "warnings": warnings,
    }
    return report


def counts_finite(auto):
    from .matcher import classify_finiteness
    return classify_finiteness(auto) == "finite"


def run_sweep(cfg: AnalysisConfig, thetas, oracle=False) -> list:
    """One analysis row per angle; failures land in the row's error column."""
    import copy

    from .config import load_config

    def one(theta):
        row = {"theta": theta, "slope": math.tan(theta), "lower": None,
               "upper": None, "oracle_slope": None, "error": ""}
        try:
            sub = copy.copy(cfg)
            sub.options = copy.copy(cfg.options)
            sub.options.oracle = oracle
            beta_float = cfg.ctx.to_float(cfg.ctx.beta) if cfg.ctx.is_exact \
                else cfg.ctx.beta_value
            from .field import FloatContext
            fctx = FloatContext(beta_float)
            from .systems import IfsSpec, MapSpec, reduce_projection
            sub.ctx = fctx
            sub.ifs1 = IfsSpec(fctx, [MapSpec(m.n, cfg.ctx.to_float(m.a))
                                      for m in cfg.ifs1.maps])
            sub.ifs2 = IfsSpec(fctx, [MapSpec(m.n, cfg.ctx.to_float(m.a))
                                      for m in cfg.ifs2.maps])
            sub.projection = reduce_projection(fctx, theta_radians=theta)
            sub.warnings = []
            rep = run_analysis(sub)
            row["lower"] = rep["bracket"]["lower"]["value"]
            row["upper"] = rep["bracket"]["upper"]["value"]
            if rep["oracle"]:
                row["oracle_slope"] = rep["oracle"]["slope"]
        except ProjdimError as exc:
            row["error"] = str(exc)
        return row

    workers = max(1, int(cfg.options.workers))
    if workers == 1:
        return [one(t) for t in thetas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, thetas))
