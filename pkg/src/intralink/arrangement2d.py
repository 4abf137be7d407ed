"""Exact linear-region census for two-input layered networks.

The input box is split neuron by neuron: inside a cell every pre-activation is
affine, so a neuron's zero line cuts the cell into at most two convex parts,
computed with exact rational clipping.  Afterwards edge-adjacent cells that
carry the same final affine map are merged with a union-find; the number of
merged groups is the count of linear regions inside the box.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bounds import region_upper_bound, shape_of
from .network import LayerSpec, NetworkSpec, check, evaluate_point, serialize
from .pwl import rat

Affine = tuple  # (cx, cy, c0)
ZERO: Affine = (Fraction(0), Fraction(0), Fraction(0))


class RegionError(ValueError):
    pass


def _aff_eval(a: Affine, p) -> Fraction:
    return a[0] * p[0] + a[1] * p[1] + a[2]


def _aff_comb(terms, bias) -> Affine:
    cx = cy = Fraction(0)
    c0 = Fraction(bias)
    for coef, a in terms:
        if coef:
            cx += coef * a[0]
            cy += coef * a[1]
            c0 += coef * a[2]
    return (cx, cy, c0)


def polygon_area(vertices) -> Fraction:
    """Signed shoelace area (positive for counterclockwise order)."""
    s = Fraction(0)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s / 2


def centroid(vertices):
    a = polygon_area(vertices)
    cx = cy = Fraction(0)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        cross = x1 * y2 - x2 * y1
        cx += (x1 + x2) * cross
        cy += (y1 + y2) * cross
    return (cx / (6 * a), cy / (6 * a))


@dataclass(frozen=True)
class ConvexCell:
    vertices: tuple  # counterclockwise
    maps: tuple  # affine map of every neuron's post-activation, in processing order
    output: Affine


@dataclass
class RegionDecomposition:
    cells: list
    merged_region_count: int
    activation_cell_count: int
    box: tuple
    region_ids: list = field(default_factory=list)

    def total_area(self) -> Fraction:
        return sum((polygon_area(c.vertices) for c in self.cells), Fraction(0))


def _clip(vertices, aff: Affine):
    """Split a convex polygon by ``aff = 0``; returns ``(positive, negative)``
    parts (``None`` when a part has zero area)."""
    vals = [_aff_eval(aff, v) for v in vertices]
    pos, neg = [], []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        sp, sq = vals[i], vals[(i + 1) % n]
        if sp >= 0:
            pos.append(p)
        if sp <= 0:
            neg.append(p)
        if (sp > 0 > sq) or (sp < 0 < sq):
            t = sp / (sp - sq)
            x = (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
            pos.append(x)
            neg.append(x)
    return _tidy(pos), _tidy(neg)


def _tidy(poly):
    out = []
    for v in poly:
        if not out or out[-1] != v:
            out.append(v)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    if len(out) < 3 or polygon_area(out) <= 0:
        return None
    return tuple(out)


def _check_box(box):
    try:
        x0, x1, y0, y1 = (rat(v) for v in box)
    except (TypeError, ValueError) as exc:
        raise RegionError(f"box must be four rationals (xlo, xhi, ylo, yhi): {exc}") from None
    if not (x0 < x1 and y0 < y1):
        raise RegionError("box must have xlo < xhi and ylo < yhi")
    return (x0, x1, y0, y1)


def enumerate_regions(net: NetworkSpec, box) -> RegionDecomposition:
    check(net)
    if net.arch != "layered":
        raise RegionError("region census supports layered networks only")
    if net.input_dim != 2:
        raise RegionError("region census needs input_dim = 2")
    x0, x1, y0, y1 = _check_box(box)
    start = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    inputs = ((Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0)))
    # a cell is (vertices, previous-layer maps, maps of all neurons so far)
    cells = [(start, inputs, ())]
    for layer in net.layers:
        cur = [(v, prev, allm, []) for v, prev, allm in cells]
        j = 0
        for size in layer.groups():
            for pos in range(size):
                row, bias = layer.weights[j], layer.biases[j]
                nxt = []
                for verts, prev, allm, posts in cur:
                    terms = list(zip(row, prev))
                    if pos > 0:
                        terms.append((Fraction(-1), posts[-1]))
                    g = _aff_comb(terms, bias)
                    if g[0] == 0 and g[1] == 0:
                        parts = [(verts, g if g[2] > 0 else ZERO)]
                    else:
                        above, below = _clip(verts, g)
                        parts = [(p, m) for p, m in ((above, g), (below, ZERO)) if p is not None]
                    for p, m in parts:
                        nxt.append((p, prev, allm, posts + [m]))
                cur = nxt
                j += 1
        cells = [(v, tuple(posts), allm + tuple(posts)) for v, _, allm, posts in cur]
    out = []
    for verts, last, allm in cells:
        final = _aff_comb(zip(net.out_coeffs, last), net.out_bias)
        out.append(ConvexCell(verts, allm, final))
    ids = _merge(out)
    return RegionDecomposition(out, len(set(ids)), len(out), (x0, x1, y0, y1), ids)


def _line_key(p, q):
    """Canonical supporting line of segment pq plus a coordinate along it."""
    a = q[1] - p[1]
    b = p[0] - q[0]
    c = -(a * p[0] + b * p[1])
    s = a if a != 0 else b
    a, b, c = a / s, b / s, c / s
    coord = (lambda v: v[0]) if b != 0 else (lambda v: v[1])
    lo, hi = sorted((coord(p), coord(q)))
    return (a, b, c), lo, hi


def _merge(cells) -> list:
    parent = list(range(len(cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_line = {}
    for idx, cell in enumerate(cells):
        vs = cell.vertices
        for i in range(len(vs)):
            key, lo, hi = _line_key(vs[i], vs[(i + 1) % len(vs)])
            by_line.setdefault(key, []).append((lo, hi, idx))
    for segs in by_line.values():
        segs.sort()
        active = []  # segments whose hi may still overlap later ones
        for lo, hi, idx in segs:
            active = [s for s in active if s[1] > lo]
            for _, _, other in active:
                if other != idx and cells[other].output == cells[idx].output:
                    ra, rb = find(other), find(idx)
                    if ra != rb:
                        parent[ra] = rb
            active.append((lo, hi, idx))
    roots = {}
    return [roots.setdefault(find(i), len(roots)) for i in range(len(cells))]


# -- checks ---------------------------------------------------------------------


@dataclass
class RegionReport:
    merged_regions: int
    activation_cells: int
    upper_bound: int
    ok: bool
    box: tuple
    net: Optional[str] = None  # serialized counterexample on violation

    def to_dict(self) -> dict:
        return {"merged_regions": self.merged_regions, "activation_cells": self.activation_cells,
                "upper_bound": self.upper_bound, "ok": self.ok,
                "box": [str(v) for v in self.box], "clipped_to_box": True,
                "net": self.net}


def check_region_bound(net: NetworkSpec, box) -> RegionReport:
    dec = enumerate_regions(net, box)
    upper = region_upper_bound(shape_of(net))
    ok = dec.merged_region_count <= upper
    return RegionReport(dec.merged_region_count, dec.activation_cell_count, upper, ok, dec.box,
                        None if ok else serialize(net).decode())


def check_tiling(dec: RegionDecomposition) -> bool:
    """Cell areas sum exactly to the box area."""
    x0, x1, y0, y1 = dec.box
    return dec.total_area() == (x1 - x0) * (y1 - y0)


def check_centroids(net: NetworkSpec, dec: RegionDecomposition) -> bool:
    """Network value at every cell centroid equals the cell's affine map."""
    for cell in dec.cells:
        c = centroid(cell.vertices)
        if evaluate_point(net, c) != _aff_eval(cell.output, c):
            return False
    return True


def lift_to_2d(net: NetworkSpec) -> NetworkSpec:
    """Embed a univariate layered net as a 2-input net ignoring the second input."""
    if net.input_dim != 1 or net.arch != "layered":
        raise RegionError("lift needs a univariate layered network")
    first = net.layers[0]
    lifted = LayerSpec(first.width, first.link_group,
                       tuple((row[0], Fraction(0)) for row in first.weights), first.biases)
    return NetworkSpec(2, (lifted,) + tuple(net.layers[1:]), net.out_coeffs, net.out_bias,
                       net.arch, None)


# -- export ---------------------------------------------------------------------


def _s(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def to_json_dict(dec: RegionDecomposition) -> dict:
    return {
        "box": [_s(v) for v in dec.box],
        "activation_cell_count": dec.activation_cell_count,
        "merged_region_count": dec.merged_region_count,
        "cells": [
            {"region": rid, "vertices": [[_s(x), _s(y)] for x, y in c.vertices],
             "output": [_s(v) for v in c.output]}
            for c, rid in zip(dec.cells, dec.region_ids)
        ],
    }


def to_svg(dec: RegionDecomposition, size: int = 400) -> str:
    x0, x1, y0, y1 = dec.box
    sx, sy = size / float(x1 - x0), size / float(y1 - y0)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    for cell, rid in zip(dec.cells, dec.region_ids):
        pts = " ".join(f"{float(x - x0) * sx:.3f},{float(y1 - y) * sy:.3f}" for x, y in cell.vertices)
        hue = int(hashlib.sha1(str(rid).encode()).hexdigest()[:4], 16) % 360
        parts.append(f'<polygon points="{pts}" fill="hsl({hue},60%,75%)" '
                     f'stroke="#333" stroke-width="0.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def fuzz_region_bound(cfg, box=(-4, 4, -4, 4)):
    """Random 2-input ff / pairwise-linked nets against the region bound."""
    import random

    from .verify import FuzzReport, random_net

    cfg.check()
    rng = random.Random(f"regions:{cfg.seed}")
    report = FuzzReport("region_bound", cfg.seed, cfg.cases)
    most = 0
    for case in range(cfg.cases):
        net = random_net(rng, cfg, "intra2" if case % 2 else "ff", input_dim=2)
        rep = check_region_bound(net, box)
        most = max(most, rep.merged_regions)
        if not rep.ok:
            report.violations.append({"case": case, **rep.to_dict()})
    report.stats = {"max_regions": most}
    return report


def fuzz_lift_oracle(cfg):
    """Lifted univariate nets: merged regions must equal the 1-D piece count."""
    import random

    from .network import forward_symbolic
    from .verify import FuzzReport, random_net

    cfg.check()
    rng = random.Random(f"lift:{cfg.seed}")
    report = FuzzReport("lift_oracle", cfg.seed, cfg.cases)
    for case in range(cfg.cases):
        net = random_net(rng, cfg, "intra2" if case % 2 else "ff")
        f = forward_symbolic(net)
        lo = (f.xs[0] if f.xs else Fraction(0)) - 1
        hi = (f.xs[-1] if f.xs else Fraction(0)) + 1
        dec = enumerate_regions(lift_to_2d(net), (lo, hi, -1, 1))
        if dec.merged_region_count != f.num_pieces or not check_tiling(dec):
            report.violations.append({"case": case, "regions": dec.merged_region_count,
                                      "pieces": f.num_pieces, "net": serialize(net).decode()})
    return report
