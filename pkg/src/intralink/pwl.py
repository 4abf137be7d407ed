"""Exact univariate continuous piecewise-linear functions.

Every value is a :class:`fractions.Fraction`.  A :class:`Pwl` is stored as its
breakpoints (points where the left and right slopes differ), the slopes of the
two outer pieces, and the value at ``x = 0`` of the leftmost affine piece,
which pins down affine functions that have no breakpoints.  Slopes between
consecutive breakpoints are derived, so continuity holds by construction.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Rat = Fraction
Interval = tuple  # (lo, hi) of Fractions


class PwlError(ValueError):
    """Base class for errors raised by the piecewise-linear engine."""


class MalformedInput(PwlError):
    pass


class DomainError(PwlError):
    pass


class CompositionError(PwlError):
    pass


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction (never floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


@dataclass(frozen=True)
class PieceReport:
    pieces: int
    breakpoints: int
    crossing_zeros: int
    distinct_zeros: int


@dataclass(frozen=True)
class Pwl:
    xs: tuple
    ys: tuple
    left_slope: Fraction
    right_slope: Fraction
    intercept: Fraction
    domain: Optional[tuple] = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def affine(slope=0, intercept=0, domain=None) -> "Pwl":
        s, c = rat(slope), rat(intercept)
        return Pwl((), (), s, s, c, _norm_domain(domain))

    @staticmethod
    def identity(domain=None) -> "Pwl":
        return Pwl.affine(1, 0, domain)

    @staticmethod
    def constant(value, domain=None) -> "Pwl":
        return Pwl.affine(0, value, domain)

    @staticmethod
    def from_points(points, left_slope=0, right_slope=0, domain=None) -> "Pwl":
        """Build from ``(x, y)`` pairs; see :func:`canonicalize`."""
        return canonicalize(points, left_slope, right_slope, domain)

    # -- basic queries ----------------------------------------------------

    @property
    def breakpoints(self) -> list:
        return list(zip(self.xs, self.ys))

    @property
    def num_breakpoints(self) -> int:
        return len(self.xs)

    @property
    def num_pieces(self) -> int:
        return len(self.xs) + 1

    def slopes(self) -> list:
        """Slopes of all pieces from left to right."""
        out = [self.left_slope]
        for i in range(len(self.xs) - 1):
            out.append((self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]))
        if self.xs:
            out.append(self.right_slope)
        return out

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def value(self, x) -> Fraction:
        """Evaluate ignoring the domain restriction (affine extrapolation)."""
        x = rat(x)
        xs = self.xs
        if not xs:
            return self.intercept + self.left_slope * x
        if x <= xs[0]:
            return self.ys[0] + self.left_slope * (x - xs[0])
        if x >= xs[-1]:
            return self.ys[-1] + self.right_slope * (x - xs[-1])
        i = bisect.bisect_right(xs, x)
        x0, x1 = xs[i - 1], xs[i]
        y0, y1 = self.ys[i - 1], self.ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def restrict(self, lo, hi) -> "Pwl":
        """Restrict to ``[lo, hi]`` (must lie inside the current domain)."""
        lo, hi = rat(lo), rat(hi)
        if self.domain is not None and (lo < self.domain[0] or hi > self.domain[1]):
            raise DomainError(f"[{lo}, {hi}] is not inside {self.domain}")
        return _rebuild(self, (lo, hi))

    def knots(self) -> list:
        """Breakpoint abscissae plus the domain endpoints, if any."""
        xs = list(self.xs)
        if self.domain is not None:
            xs = [self.domain[0]] + xs + [self.domain[1]]
        return xs

    def range(self) -> tuple:
        """Exact (min, max) over the domain; infinite ends are ``None``."""
        ks = self.knots()
        if not ks:
            if self.left_slope == 0:
                return (self.intercept, self.intercept)
            return (None, None)
        vals = [self.value(x) for x in ks]
        lo, hi = min(vals), max(vals)
        if self.domain is None:
            if self.left_slope > 0 or self.right_slope < 0:
                lo = None
            if self.left_slope < 0 or self.right_slope > 0:
                hi = None
        return (lo, hi)

    def __add__(self, other):
        if isinstance(other, Pwl):
            return linear_combination([(1, self), (1, other)])
        return linear_combination([(1, self)], other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Pwl):
            return linear_combination([(1, self), (-1, other)])
        return linear_combination([(1, self)], -rat(other))

    def __rsub__(self, other):
        return linear_combination([(-1, self)], other)

    def __neg__(self):
        return linear_combination([(-1, self)])

    def __mul__(self, coef):
        return linear_combination([(coef, self)])

    __rmul__ = __mul__

    def to_csv(self, exact: bool = True) -> str:
        return breakpoints_csv(self, exact)


def _norm_domain(domain):
    if domain is None:
        return None
    lo, hi = rat(domain[0]), rat(domain[1])
    if not lo < hi:
        raise DomainError(f"empty or degenerate domain [{lo}, {hi}]")
    return (lo, hi)


def _from_samples(xs, ys, left_slope, right_slope, domain) -> Pwl:
    """Canonical Pwl from values at a sorted abscissa set that contains every
    breakpoint of the function (and the domain endpoints when bounded)."""
    if domain is not None:
        lo, hi = domain
        pts = [(x, y) for x, y in zip(xs, ys) if lo <= x <= hi]
        if len(pts) < 2 or pts[0][0] != lo or pts[-1][0] != hi:
            raise PwlError("bounded samples must include both domain endpoints")
        s_left = (pts[1][1] - pts[0][1]) / (pts[1][0] - pts[0][0])
        s_right = (pts[-1][1] - pts[-2][1]) / (pts[-1][0] - pts[-2][0])
        return _prune(pts, s_left, s_right, domain)
    pts = list(zip(xs, ys))
    return _prune(pts, left_slope, right_slope, None)


def _prune(pts, left_slope, right_slope, domain) -> Pwl:
    """Drop points that are not breakpoints.  For bounded domains the first and
    last points are the endpoints and are never breakpoints."""
    if domain is not None:
        inner = pts[1:-1]
        anchor = pts[0]
    else:
        inner = pts
        anchor = pts[0] if pts else None
    keep_x, keep_y = [], []
    prev_slope = left_slope
    n = len(inner)
    for i, (x, y) in enumerate(inner):
        if i + 1 < n:
            nx, ny = inner[i + 1]
            nxt = (ny - y) / (nx - x)
        elif domain is not None:
            nx, ny = pts[-1]
            nxt = (ny - y) / (nx - x)
        else:
            nxt = right_slope
        if nxt != prev_slope:
            keep_x.append(x)
            keep_y.append(y)
        prev_slope = nxt
    if keep_x:
        intercept = keep_y[0] - left_slope * keep_x[0]
    elif anchor is not None:
        intercept = anchor[1] - left_slope * anchor[0]
        right_slope = left_slope
    else:
        raise PwlError("cannot determine intercept of an empty sample set")
    return Pwl(tuple(keep_x), tuple(keep_y), left_slope, right_slope, intercept, domain)


def _rebuild(f: Pwl, domain) -> Pwl:
    if domain is None:
        xs = list(f.xs) or [Fraction(0)]
        return _from_samples(xs, [f.value(x) for x in xs], f.left_slope, f.right_slope, None)
    lo, hi = domain
    xs = [lo] + [x for x in f.xs if lo < x < hi] + [hi]
    return _from_samples(xs, [f.value(x) for x in xs], None, None, domain)


def canonicalize(points, left_slope=0, right_slope=0, domain=None) -> Pwl:
    """Canonical Pwl from raw ``(x, y)`` points sorted by abscissa.

    Repeated abscissae are allowed only with equal ordinates.  Collinear
    points are removed.  With a bounded ``domain`` the outer slopes are taken
    from the points themselves and the points must cover the domain ends
    (points outside the domain are an error).
    """
    pts = [(rat(x), rat(y)) for x, y in points]
    merged = []
    for x, y in pts:
        if merged and x < merged[-1][0]:
            raise MalformedInput("abscissae must be sorted")
        if merged and x == merged[-1][0]:
            if y != merged[-1][1]:
                raise MalformedInput(f"discontinuity at x={x}: {merged[-1][1]} != {y}")
            continue
        merged.append((x, y))
    domain = _norm_domain(domain)
    if domain is not None:
        if not merged or merged[0][0] != domain[0] or merged[-1][0] != domain[1]:
            raise MalformedInput("points must start and end at the domain endpoints")
        if len(merged) < 2:
            raise MalformedInput("a bounded Pwl needs both endpoints")
        return _from_samples([p[0] for p in merged], [p[1] for p in merged], None, None, domain)
    if not merged:
        raise MalformedInput("an unbounded Pwl needs at least one point")
    return _prune(merged, rat(left_slope), rat(right_slope), None)


def evaluate(f: Pwl, x) -> Fraction:
    x = rat(x)
    if f.domain is not None and not (f.domain[0] <= x <= f.domain[1]):
        raise DomainError(f"x={x} outside domain [{f.domain[0]}, {f.domain[1]}]")
    return f.value(x)


def _common_domain(fs: Sequence[Pwl]):
    doms = {f.domain for f in fs}
    if len(doms) > 1:
        raise DomainError(f"incompatible domains: {sorted(map(str, doms))}")
    return doms.pop() if doms else None


def linear_combination(terms: Iterable, bias=0) -> Pwl:
    """Exact ``sum(coef * f) + bias`` over Pwls sharing one domain."""
    terms = [(rat(c), f) for c, f in terms]
    bias = rat(bias)
    if not terms:
        return Pwl.constant(bias)
    domain = _common_domain([f for _, f in terms])
    live = [(c, f) for c, f in terms if c != 0]
    xs = sorted({x for _, f in live for x in f.xs})
    if domain is not None:
        xs = [domain[0]] + xs + [domain[1]]
    elif not xs:
        xs = [Fraction(0)]
    ys = [sum((c * f.value(x) for c, f in live), bias) for x in xs]
    ls = sum((c * f.left_slope for c, f in live), Fraction(0))
    rs = sum((c * f.right_slope for c, f in live), Fraction(0))
    return _from_samples(xs, ys, ls, rs, domain)


def _sample_grid(g: Pwl) -> list:
    """Knots of ``g`` plus every zero where the sign changes inside a piece."""
    xs = g.knots()
    if not xs:
        if g.left_slope == 0:
            return [Fraction(0)]
        return [-g.intercept / g.left_slope]
    out = []
    # left ray
    if g.domain is None and g.left_slope != 0:
        y0 = g.value(xs[0])
        if y0 != 0:
            r = xs[0] - y0 / g.left_slope
            if r < xs[0]:
                out.append(r)
    for i, x in enumerate(xs):
        out.append(x)
        if i + 1 < len(xs):
            y0, y1 = g.value(x), g.value(xs[i + 1])
            if (y0 < 0 < y1) or (y1 < 0 < y0):
                out.append(x + (xs[i + 1] - x) * (-y0) / (y1 - y0))
    if g.domain is None and g.right_slope != 0:
        y1 = g.value(xs[-1])
        if y1 != 0:
            r = xs[-1] - y1 / g.right_slope
            if r > xs[-1]:
                out.append(r)
    return out


def relu(g: Pwl) -> Pwl:
    """Exact ``max(g, 0)``."""
    xs = _sample_grid(g)
    ys = [max(g.value(x), Fraction(0)) for x in xs]
    if g.domain is not None:
        return _from_samples(xs, ys, None, None, g.domain)
    ls = g.left_slope if g.value(xs[0] - 1) > 0 else Fraction(0)
    rs = g.right_slope if g.value(xs[-1] + 1) > 0 else Fraction(0)
    return _from_samples(xs, ys, ls, rs, None)


def _preimages(f: Pwl, t: Fraction) -> list:
    """Abscissae where ``f`` crosses or touches level ``t`` inside open pieces
    (knots are handled separately by callers)."""
    ks = set(f.knots())
    return [x for x in _sample_grid(linear_combination([(1, f)], -t)) if x not in ks]


def compose(outer: Pwl, inner: Pwl) -> Pwl:
    """Exact ``outer(inner(x))``; inner's range must lie in outer's domain."""
    if outer.domain is not None:
        lo, hi = inner.range()
        if lo is None or hi is None or lo < outer.domain[0] or hi > outer.domain[1]:
            raise CompositionError(
                f"range [{lo}, {hi}] of inner not inside outer domain {outer.domain}"
            )
    pts = set(inner.knots())
    for t in outer.xs:
        pts.update(_preimages(inner, t))
    xs = sorted(pts)
    if inner.domain is None and not xs:
        xs = [Fraction(0)]
    ys = [outer.value(inner.value(x)) for x in xs]
    if inner.domain is not None:
        return _from_samples(xs, ys, None, None, inner.domain)

    # far left, inner runs to -inf when its slope is positive
    s = inner.left_slope
    ls = s * (outer.left_slope if s > 0 else outer.right_slope)
    s = inner.right_slope
    rs = s * (outer.right_slope if s > 0 else outer.left_slope)
    return _from_samples(xs, ys, ls, rs, None)


def _zero_loci(f: Pwl) -> list:
    """Maximal zero sets of ``f`` as ``(sign_left, sign_right)`` pairs; a side
    is 0 when the locus reaches a domain end or is an unbounded ray."""
    xs = _sample_grid(f)
    signs = []
    if f.domain is None:
        signs.append(_sign(f.value(xs[0] - 1)))
    for i, x in enumerate(xs):
        signs.append(_sign(f.value(x)))
        if i + 1 < len(xs):
            signs.append(_sign(f.value((x + xs[i + 1]) / 2)))
    if f.domain is None:
        signs.append(_sign(f.value(xs[-1] + 1)))
    loci = []
    i, n = 0, len(signs)
    while i < n:
        if signs[i] != 0:
            i += 1
            continue
        j = i
        while j + 1 < n and signs[j + 1] == 0:
            j += 1
        left = signs[i - 1] if i > 0 else 0
        right = signs[j + 1] if j + 1 < n else 0
        loci.append((left, right))
        i = j + 1
    return loci


def crossing_zero_points(f: Pwl) -> list:
    """Abscissae of isolated sign-change zeros (zero segments excluded)."""
    out = []
    ks = f.knots()
    for x in _sample_grid(f):
        if f.value(x) != 0:
            continue
        if f.domain is not None and x in (f.domain[0], f.domain[1]):
            continue
        i = bisect.bisect_left(ks, x)
        left = ks[i - 1] if i > 0 else x - 1
        j = bisect.bisect_right(ks, x)
        right = ks[j] if j < len(ks) else x + 1
        if _sign(f.value((left + x) / 2)) * _sign(f.value((right + x) / 2)) < 0:
            out.append(x)
    return out


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def analyze(f: Pwl) -> PieceReport:
    loci = _zero_loci(f)
    crossing = sum(1 for l, r in loci if l * r < 0)
    return PieceReport(
        pieces=f.num_pieces,
        breakpoints=f.num_breakpoints,
        crossing_zeros=crossing,
        distinct_zeros=len(loci),
    )


def is_sawtooth(f: Pwl, n: int, interval) -> bool:
    """True iff ``f`` on ``interval`` is a continuous triangle wave of ``n``
    equal-width pieces whose slopes alternate between ``+s`` and ``-s``."""
    a, b = rat(interval[0]), rat(interval[1])
    if n < 1 or not a < b:
        return False
    if f.domain is not None and (a < f.domain[0] or b > f.domain[1]):
        return False
    inner = [x for x in f.xs if a < x < b]
    width = (b - a) / n
    if inner != [a + width * i for i in range(1, n)]:
        return False
    grid = [a] + inner + [b]
    slopes = [(f.value(grid[i + 1]) - f.value(grid[i])) / width for i in range(n)]
    s = abs(slopes[0])
    if s == 0:
        return False
    return all(slopes[i] == s * (1 if slopes[0] > 0 else -1) * (-1) ** i for i in range(n))


def equals(f: Pwl, g: Pwl) -> bool:
    return f == g


def new_breakpoints(result: Pwl, *sources: Pwl) -> list:
    """Breakpoints of ``result`` that are not breakpoints of any source."""
    old = set()
    for s in sources:
        old.update(s.xs)
    return [x for x in result.xs if x not in old]


def breakpoints_csv(f: Pwl, exact: bool = True) -> str:
    return points_csv(f.breakpoints, exact)


def points_csv(points, exact: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if exact:
        w.writerow(["x_num", "x_den", "y_num", "y_den"])
        for x, y in points:
            w.writerow([x.numerator, x.denominator, y.numerator, y.denominator])
    else:
        w.writerow(["x", "y"])
        for x, y in points:
            w.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


def read_breakpoints_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x_num", "x_den", "y_num", "y_den"]:
        raise MalformedInput("expected header x_num,x_den,y_num,y_den")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            xn, xd, yn, yd = (int(v) for v in row)
            out.append((Fraction(xn, xd), Fraction(yn, yd)))
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from None
    return out
