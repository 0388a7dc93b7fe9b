"""Exact scalar arithmetic in Q(beta), plus a float backend.

The base beta > 1 is given either as an exact rational (degree-1 context) or
by an integer minimal polynomial with an isolating interval that contains
exactly one real root.  Elements are polynomials in beta of degree below the
minimal polynomial's, with rational coefficients.  Zero tests are exact, and
sign decisions refine the isolating interval until the evaluated interval of
the element excludes zero.

``FloatContext`` mirrors the same small surface with plain floats and a
global comparison tolerance, for inputs that do not live in Q(beta).
"""
from __future__ import annotations

import math
import re
import threading
from fractions import Fraction

from .errors import (
    DivisionByZero,
    FieldError,
    MixedContexts,
    NonTerminatingComparison,
)

LESS, EQUAL, GREATER = -1, 0, 1

_MAX_REFINEMENTS = 10**6


# ---------------------------------------------------------------------------
# dense polynomial helpers, coefficients constant-term first
# ---------------------------------------------------------------------------

def _trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                  for i in range(n)])


def _pneg(a):
    return [-c for c in a]


def _pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _trim(out)


def _pdivmod(a, b):
    """Quotient and remainder of a by b over the rationals."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / lead
        q[k] = c
        for i, bi in enumerate(b):
            a[k + i] -= c * bi
        a = _trim(a)
    return _trim(q), a


def _peval(cs, x):
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _pderiv(cs):
    return _trim([i * c for i, c in enumerate(cs)][1:])


def _interval_eval(cs, lo, hi):
    """Range enclosure of the polynomial on [lo, hi] by interval Horner."""
    vlo = vhi = Fraction(0)
    for c in reversed(cs):
        cands = (vlo * lo, vlo * hi, vhi * lo, vhi * hi)
        vlo, vhi = min(cands) + c, max(cands) + c
    return vlo, vhi


def _sign_changes(values):
    seq = [v for v in values if v != 0]
    return sum(1 for a, b in zip(seq, seq[1:]) if (a > 0) != (b > 0))


def _sturm_chain(p):
    chain = [list(p), _pderiv(p)]
    while chain[-1]:
        _, r = _pdivmod(chain[-2], chain[-1])
        if not r:
            break
        chain.append(_pneg(r))
    return [c for c in chain if c]


def sturm_count(p, a, b):
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    chain = _sturm_chain(list(p))
    va = _sign_changes([_peval(c, a) for c in chain])
    vb = _sign_changes([_peval(c, b) for c in chain])
    return va - vb


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**15)
    if isinstance(x, str):
        return Fraction(x)
    raise FieldError(f"cannot interpret {x!r} as a rational")


# ---------------------------------------------------------------------------
# exact context and elements
# ---------------------------------------------------------------------------

class FieldContext:
    """Q(beta) for one fixed real algebraic beta > 1.

    ``min_poly`` lists integer coefficients from the constant term upward.
    Degree-1 polynomials describe a rational beta and need no isolating
    interval.  Higher degrees must be monic and irreducible over Q; the
    interval (low, high) must isolate exactly one real root, which is
    verified with a Sturm count at construction.
    """

    is_exact = True

    def __init__(self, min_poly, low=None, high=None):
        cs = [int(c) for c in min_poly]
        while cs and cs[-1] == 0:
            cs.pop()
        if len(cs) < 2:
            raise FieldError("minimal polynomial must have positive degree")
        if cs[-1] < 0:
            cs = [-c for c in cs]
        self.min_poly = tuple(cs)
        self.degree = len(cs) - 1

        if self.degree == 1:
            beta = Fraction(-cs[0], cs[1])
            if beta <= 1:
                raise FieldError("beta must exceed 1")
            self._lo = self._hi = beta
        else:
            if cs[-1] != 1:
                raise FieldError("minimal polynomial of degree >= 2 must be monic")
            if low is None or high is None:
                raise FieldError("isolating interval required for degree >= 2")
            lo, hi = _as_fraction(low), _as_fraction(high)
            if not lo < hi:
                raise FieldError("empty isolating interval")
            p = [Fraction(c) for c in cs]
            if _peval(p, lo) == 0 or _peval(p, hi) == 0:
                raise FieldError("isolating interval endpoints must not be roots")
            if sturm_count(p, lo, hi) != 1:
                raise FieldError("isolating interval must contain exactly one real root")
            self._lo, self._hi = lo, hi
            self._poly_frac = p
            # beta > 1: narrow until the interval clears 1, or fail
            while self._lo <= 1:
                if self._hi <= 1:
                    raise FieldError("beta must exceed 1")
                self._refine_once()

        self._lock = threading.Lock()
        self._powers: dict[int, FieldElement] = {}

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, FieldContext) and self.min_poly == other.min_poly

    def __hash__(self):
        return hash(self.min_poly)

    def __repr__(self):
        return f"FieldContext(min_poly={list(self.min_poly)})"

    # -- root refinement ----------------------------------------------------

    def _refine_once(self):
        lo, hi = self._lo, self._hi
        mid = (lo + hi) / 2
        s_mid = _peval(self._poly_frac, mid)
        if s_mid == 0:
            raise FieldError("minimal polynomial has a rational root; not irreducible")
        s_lo = _peval(self._poly_frac, lo)
        if (s_lo > 0) != (s_mid > 0):
            self._hi = mid
        else:
            self._lo = mid

    def root_bounds(self, width=None):
        """Current rational enclosure of beta, refined to ``width`` if given."""
        if self.degree == 1:
            return self._lo, self._hi
        if width is not None:
            width = _as_fraction(width)
            with self._lock:
                steps = 0
                while self._hi - self._lo > width:
                    self._refine_once()
                    steps += 1
                    if steps > _MAX_REFINEMENTS:
                        raise NonTerminatingComparison("root refinement budget exhausted")
        return self._lo, self._hi

    # -- element constructors ------------------------------------------------

    def element(self, value):
        if isinstance(value, FieldElement):
            if value.ctx != self:
                raise MixedContexts("element belongs to a different context")
            return value
        if isinstance(value, str):
            return self.parse(value)
        q = _as_fraction(value)
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = q
        return FieldElement(self, tuple(coeffs))

    def from_coeffs(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > self.degree:
            cs = self._reduce(cs)
        cs += [Fraction(0)] * (self.degree - len(cs))
        return FieldElement(self, tuple(cs[: self.degree]))

    @property
    def zero(self):
        return self.element(0)

    @property
    def one(self):
        return self.element(1)

    @property
    def beta(self):
        if self.degree == 1:
            return self.element(self._lo)
        return self.from_coeffs([0, 1])

    def parse(self, text):
        return parse_scalar(text, self)

    # -- arithmetic kernel ----------------------------------------------------

    def _reduce(self, cs):
        if len(cs) <= self.degree:
            return _trim(cs)
        _, r = _pdivmod(cs, [Fraction(c) for c in self.min_poly])
        return r

    def _mul(self, a, b):
        return self._reduce(_pmul(list(a), list(b)))

    def _inv(self, cs):
        """Inverse modulo the minimal polynomial via the extended Euclid run."""
        if not _trim(list(cs)):
            raise DivisionByZero("division by zero element")
        if self.degree == 1:
            return [1 / cs[0]]
        r0 = [Fraction(c) for c in self.min_poly]
        r1 = _trim(list(cs))
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _padd(s0, _pneg(_pmul(q, s1)))
        if len(r0) != 1:
            raise FieldError("minimal polynomial is reducible; no inverse")
        g = r0[0]
        return [c / g for c in s0]

    # -- decisions -------------------------------------------------------------

    def sign(self, elem):
        """Exact sign of the element evaluated at beta: -1, 0 or +1."""
        elem = self.element(elem)
        cs = _trim(list(elem.coeffs))
        if not cs:
            return 0
        if self.degree == 1:
            v = cs[0]
            return -1 if v < 0 else 1
        with self._lock:
            steps = 0
            while True:
                vlo, vhi = _interval_eval(cs, self._lo, self._hi)
                if vlo > 0:
                    return 1
                if vhi < 0:
                    return -1
                self._refine_once()
                steps += 1
                if steps > _MAX_REFINEMENTS:
                    raise NonTerminatingComparison(
                        "sign decision did not resolve; reducible minimal polynomial?")

    def compare(self, a, b):
        return self.sign(self.element(a) - self.element(b))

    def is_zero(self, elem):
        return not _trim(list(self.element(elem).coeffs))

    def approximate(self, elem, precision):
        """Rational approximation with certified error at most ``precision``."""
        elem = self.element(elem)
        precision = _as_fraction(precision)
        if precision <= 0:
            raise FieldError("precision must be positive")
        cs = _trim(list(elem.coeffs))
        if not cs:
            return Fraction(0)
        if self.degree == 1:
            return _peval(cs, self._lo)
        with self._lock:
            steps = 0
            while True:
                vlo, vhi = _interval_eval(cs, self._lo, self._hi)
                if vhi - vlo <= precision:
                    return (vlo + vhi) / 2
                self._refine_once()
                steps += 1
                if steps > _MAX_REFINEMENTS:
                    raise NonTerminatingComparison("approximation budget exhausted")

    def to_float(self, elem):
        elem = self.element(elem)
        if elem._float is None:
            coarse = self.approximate(elem, Fraction(1, 2**20))
            scale = max(abs(coarse), Fraction(1))
            elem._float = float(self.approximate(elem, scale / 2**53))
        return elem._float

    def power_of_beta(self, k):
        """beta**k as an element, cached; k may be negative."""
        k = int(k)
        with self._lock:
            hit = self._powers.get(k)
        if hit is not None:
            return hit
        if k == 0:
            val = self.one
        elif k > 0:
            val = self.beta
            for _ in range(k - 1):
                val = val * self.beta
        else:
            inv = self.from_coeffs(self._inv(self.beta.coeffs))
            val = inv
            for _ in range(-k - 1):
                val = val * inv
        with self._lock:
            self._powers[k] = val
        return val

    def dedup_key(self, elem):
        return self.element(elem)

    def sort_values(self, values):
        """Values sorted by exact comparison."""
        import functools
        return sorted(values, key=functools.cmp_to_key(self.compare))

    def format(self, elem):
        return str(self.element(elem))


class FieldElement:
    """A polynomial in beta, reduced; immutable and hashable."""

    __slots__ = ("ctx", "coeffs", "_float")

    def __init__(self, ctx, coeffs):
        self.ctx = ctx
        self.coeffs = coeffs
        self._float = None

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise MixedContexts("operands from different field contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.element(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.ctx.from_coeffs([a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.ctx.from_coeffs([a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return self.ctx.from_coeffs([-a for a in self.coeffs])

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.ctx.from_coeffs(self.ctx._mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * self.ctx.from_coeffs(self.ctx._inv(o.coeffs))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.ctx.one / self.__pow__(-k)
        out = self.ctx.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.element(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx.min_poly, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def __lt__(self, other):
        return self.ctx.compare(self, other) < 0

    def __le__(self, other):
        return self.ctx.compare(self, other) <= 0

    def __gt__(self, other):
        return self.ctx.compare(self, other) > 0

    def __ge__(self, other):
        return self.ctx.compare(self, other) >= 0

    def __float__(self):
        return self.ctx.to_float(self)

    def __str__(self):
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            coef = str(mag)
            if k == 0:
                term = coef
            elif k == 1:
                term = "b" if mag == 1 else f"{coef}*b"
            else:
                term = f"b^{k}" if mag == 1 else f"{coef}*b^{k}"
            if not terms:
                terms.append(term if c > 0 else "-" + term)
            else:
                terms.append(("+" if c > 0 else "-") + term)
        return "".join(terms) if terms else "0"

    __repr__ = __str__


# ---------------------------------------------------------------------------
# float backend
# ---------------------------------------------------------------------------

class FloatContext:
    """Plain-float mirror of the exact context, with a comparison tolerance."""

    is_exact = False

    def __init__(self, beta, tol=1e-12):
        beta = float(beta)
        if not beta > 1:
            raise FieldError("beta must exceed 1")
        self.beta_value = beta
        self.tol = float(tol)

    def __eq__(self, other):
        return (isinstance(other, FloatContext)
                and other.beta_value == self.beta_value and other.tol == self.tol)

    def __hash__(self):
        return hash((self.beta_value, self.tol))

    def __repr__(self):
        return f"FloatContext(beta={self.beta_value})"

    def element(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, FieldElement):
            raise MixedContexts("exact element passed to float context")
        return float(value)

    @property
    def zero(self):
        return 0.0

    @property
    def one(self):
        return 1.0

    @property
    def beta(self):
        return self.beta_value

    def parse(self, text):
        return parse_scalar(text, self)

    def sign(self, x):
        x = float(x)
        if abs(x) <= self.tol:
            return 0
        return -1 if x < 0 else 1

    def compare(self, a, b):
        return self.sign(float(a) - float(b))

    def is_zero(self, x):
        return abs(float(x)) <= self.tol

    def approximate(self, x, precision):
        return Fraction(float(x)).limit_denominator(10**15)

    def to_float(self, x):
        return float(x)

    def power_of_beta(self, k):
        return self.beta_value ** int(k)

    def dedup_key(self, x):
        return round(float(x) / self.tol)

    def sort_values(self, values):
        return sorted(values, key=float)

    def format(self, x):
        return repr(float(x))


# ---------------------------------------------------------------------------
# scalar expression parser: rationals and polynomials in b, +-*/^ and parens
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+\.\d+|\d+|[bB]|\^|\*|/|\+|-|\(|\))")


def _tokenize(text):
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FieldError(f"bad scalar syntax near {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    out.append(None)
    return out


def parse_scalar(text, ctx):
    """Parse expressions like '3/2', 'b^8-1' or '(b^8-1)/(b^8-b^4+1)'."""
    tokens = _tokenize(str(text))
    idx = [0]

    def peek():
        return tokens[idx[0]]

    def take(expected=None):
        tok = tokens[idx[0]]
        if expected is not None and tok != expected:
            raise FieldError(f"expected {expected!r}, found {tok!r} in {text!r}")
        idx[0] += 1
        return tok

    def atom():
        tok = take()
        if tok == "(":
            v = expr()
            take(")")
            return v
        if tok in ("b", "B"):
            return ctx.beta
        if tok is None:
            raise FieldError(f"unexpected end of scalar {text!r}")
        if "." in tok:
            if ctx.is_exact:
                return ctx.element(Fraction(tok))
            return float(tok)
        return ctx.element(int(tok))

    def factor():
        neg = False
        while peek() in ("+", "-"):
            if take() == "-":
                neg = not neg
        v = atom()
        if peek() == "^":
            take()
            sgn = 1
            while peek() in ("+", "-"):
                if take() == "-":
                    sgn = -sgn
            e = take()
            if e is None or not e.isdigit():
                raise FieldError(f"bad exponent in {text!r}")
            k = sgn * int(e)
            if isinstance(v, float):
                v = v ** k
            elif k >= 0:
                v = v ** k
            else:
                v = ctx.one / (v ** (-k))
        return -v if neg else v

    def term():
        v = factor()
        while peek() in ("*", "/"):
            if take() == "*":
                v = v * factor()
            else:
                w = factor()
                if ctx.is_exact:
                    if ctx.is_zero(w):
                        raise DivisionByZero("division by zero in scalar expression")
                    v = v / w
                else:
                    v = v / w
        return v

    def expr():
        v = term()
        while peek() in ("+", "-"):
            if take() == "+":
                v = v + term()
            else:
                v = v - term()
        return v

    value = expr()
    if peek() is not None:
        raise FieldError(f"trailing input in scalar {text!r}")
    return value
