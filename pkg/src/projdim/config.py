"""Analysis configuration: JSON in, validated objects out.

Exact scalars cross the config boundary as strings in polynomial-in-b
syntax ("b^8-1", "6305/256"), so no precision is lost.  A beta given as a
decimal string has no exact provenance and routes the whole run to the
float backend, with a warning recorded on the report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, FieldError, ProjdimError
from .field import FieldContext, FloatContext
from .systems import IfsSpec, MapSpec, ProjectionForm, reduce_projection


@dataclass
class Options:
    lmax: int = 200
    osc_cap: int = 40
    gf_exact: bool = True
    vitali: bool = False
    oracle: bool = False
    finite_type: bool = False
    diameter_floor: str | None = None   # scalar expression, default hull*beta^-40
    floor_exponent: int = 40
    eps: float | None = None
    max_paths: int = 500_000
    workers: int = 1
    dim_tol: float = 1e-9
    factor_tol: float = 1e-12


@dataclass
class AnalysisConfig:
    ctx: object
    ifs1: IfsSpec
    ifs2: IfsSpec
    projection: ProjectionForm
    options: Options
    warnings: list = field(default_factory=list)


def _build_context(spec, warnings):
    if isinstance(spec, str):
        text = spec.strip()
        if "." in text:
            warnings.append({
                "code": "float-mode",
                "detail": "beta given as a bare decimal; running the float backend",
            })
            return FloatContext(float(text))
        try:
            q = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse beta {spec!r}: {exc}") from exc
        return FieldContext([-q.numerator, q.denominator])
    if isinstance(spec, dict):
        try:
            return FieldContext(spec["min_poly"],
                                spec.get("low"), spec.get("high"))
        except KeyError as exc:
            raise ConfigError(f"beta spec missing {exc}") from exc
        except FieldError as exc:
            raise ConfigError(f"bad beta spec: {exc}") from exc
    raise ConfigError("beta must be a string or an object with min_poly/low/high")


def _build_ifs(ctx, entries, name):
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{name} must be a nonempty list of maps")
    maps = []
    for e in entries:
        try:
            n = int(e["n"])
            a = ctx.element(e["a"]) if not isinstance(e["a"], str) else ctx.parse(e["a"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"map in {name} needs integer n and scalar a") from exc
        except FieldError as exc:
            raise ConfigError(f"bad scalar in {name}: {exc}") from exc
        maps.append(MapSpec(n, a))
    try:
        return IfsSpec(ctx, maps)
    except FieldError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(data: dict) -> AnalysisConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    warnings = []
    angle = data.get("angle")
    if not isinstance(angle, dict) or \
            ("theta_radians" in angle) == ("slope" in angle):
        raise ConfigError("angle must contain exactly one of theta_radians or slope")

    ctx = _build_context(data.get("beta"), warnings)
    if "theta_radians" in angle and ctx.is_exact:
        # a raw angle has no exact tangent; run the float backend instead
        beta_float = ctx.to_float(ctx.beta)
        ctx = FloatContext(beta_float)
        warnings.append({
            "code": "float-mode",
            "detail": "angle given in radians; running the float backend",
        })

    ifs1 = _build_ifs(ctx, data.get("ifs1"), "ifs1")
    ifs2 = _build_ifs(ctx, data.get("ifs2"), "ifs2")

    try:
        if "slope" in angle:
            slope = angle["slope"]
            slope = ctx.parse(slope) if isinstance(slope, str) else ctx.element(slope)
            projection = reduce_projection(ctx, slope=slope)
        else:
            projection = reduce_projection(ctx, theta_radians=float(angle["theta_radians"]))
    except ProjdimError as exc:
        raise ConfigError(str(exc)) from exc

    opts = Options()
    for key, value in (data.get("options") or {}).items():
        if not hasattr(opts, key):
            raise ConfigError(f"unknown option {key!r}")
        setattr(opts, key, value)
    return AnalysisConfig(ctx, ifs1, ifs2, projection, opts, warnings)
