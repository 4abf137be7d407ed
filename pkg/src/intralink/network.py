"""ReLU networks with intra-layer links.

A layer is a list of neurons split into consecutive link groups.  Inside a
group the first neuron is a plain ReLU unit and every later neuron subtracts
its predecessor's post-activation before the ReLU.  ``dense_intra`` layers
instead subtract a weighted sum of all earlier post-activations of the layer,
and ``resnet_scalar`` networks follow the one-neuron residual recurrence
``g_{i+1} = c_i * f_i + g_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .pwl import Pwl, linear_combination, rat, relu

ARCHS = ("layered", "resnet_scalar", "dense_intra")


class NetworkError(ValueError):
    pass


class ValidationError(NetworkError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class ParseError(NetworkError):
    pass


class NotApplicable(NetworkError):
    pass


def _rtuple(values):
    return tuple(rat(v) for v in values)


@dataclass(frozen=True)
class LayerSpec:
    width: int
    link_group: object  # int (uniform group size) or tuple of group sizes
    weights: tuple  # width rows, each of length fan-in
    biases: tuple
    links: Optional[tuple] = None  # dense_intra: row j has j coefficients
    residual: Optional[Fraction] = None  # resnet_scalar: c_i

    @staticmethod
    def make(weights, biases, link_group=1, links=None, residual=None):
        w = tuple(_rtuple(row) for row in weights)
        lg = link_group if isinstance(link_group, int) else tuple(link_group)
        lk = None if links is None else tuple(_rtuple(r) for r in links)
        res = None if residual is None else rat(residual)
        return LayerSpec(len(w), lg, w, _rtuple(biases), lk, res)

    def groups(self) -> list:
        """Sizes of the consecutive link groups."""
        if isinstance(self.link_group, int):
            n = self.link_group
            return [n] * (self.width // n) if n > 0 else []
        return list(self.link_group)


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    layers: tuple
    out_coeffs: tuple
    out_bias: Fraction = Fraction(0)
    arch: str = "layered"
    domain: Optional[tuple] = None

    @staticmethod
    def make(layers, out_coeffs, out_bias=0, arch="layered", domain=None, input_dim=1):
        dom = None if domain is None else (rat(domain[0]), rat(domain[1]))
        return NetworkSpec(input_dim, tuple(layers), _rtuple(out_coeffs), rat(out_bias), arch, dom)

    @property
    def depth(self) -> int:
        """Number of (affine, activation) stages, links stripped: k + 1."""
        return len(self.layers) + 1

    @property
    def width(self) -> int:
        return max((l.width for l in self.layers), default=0)

    @property
    def widths(self) -> list:
        return [l.width for l in self.layers]


@dataclass
class ForwardTrace:
    pre: list = field(default_factory=list)  # per layer, per neuron pre-activation (after link subtraction)
    post: list = field(default_factory=list)
    output: Optional[Pwl] = None


def validate(net: NetworkSpec) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    out = []
    if net.arch not in ARCHS:
        out.append(f"arch: unknown architecture {net.arch!r}")
    if not isinstance(net.input_dim, int) or net.input_dim < 1:
        out.append("input_dim: must be a positive integer")
    if net.domain is not None and not net.domain[0] < net.domain[1]:
        out.append("domain: lo must be < hi")
    if not net.layers:
        out.append("layers: at least one hidden layer required")
    fan_in = net.input_dim
    for i, layer in enumerate(net.layers):
        tag = f"layers[{i}]"
        if layer.width < 1:
            out.append(f"{tag}.width: must be positive")
        if len(layer.weights) != layer.width:
            out.append(f"{tag}.weights: {len(layer.weights)} rows for width {layer.width}")
        for j, row in enumerate(layer.weights):
            if len(row) != fan_in:
                out.append(f"{tag}.weights[{j}]: length {len(row)} != fan-in {fan_in}")
        if len(layer.biases) != layer.width:
            out.append(f"{tag}.biases: length {len(layer.biases)} != width {layer.width}")
        if isinstance(layer.link_group, int):
            n = layer.link_group
            if n < 1:
                out.append(f"{tag}.link_group: must be positive")
            elif layer.width % n:
                out.append(f"{tag}.link_group: {n} does not divide width {layer.width}")
        else:
            if any(g < 1 for g in layer.link_group) or sum(layer.link_group) != layer.width:
                out.append(f"{tag}.link_group: group sizes must be positive and sum to width")
        if net.arch == "dense_intra":
            if layer.links is not None:
                if len(layer.links) != layer.width or any(
                    len(r) != j for j, r in enumerate(layer.links)
                ):
                    out.append(f"{tag}.links: row j must have j coefficients")
        elif layer.links is not None:
            out.append(f"{tag}.links: only allowed for dense_intra")
        if net.arch == "resnet_scalar":
            if layer.width != 1:
                out.append(f"{tag}.width: resnet_scalar layers must have width 1")
            if layer.residual is None:
                out.append(f"{tag}.residual: resnet_scalar needs c_i")
        fan_in = layer.width
    if net.arch == "resnet_scalar":
        if net.input_dim != 1:
            out.append("input_dim: resnet_scalar is univariate")
        if len(net.out_coeffs) != 1:
            out.append("output.coeffs: resnet_scalar needs exactly c_{k+1}")
    elif len(net.out_coeffs) != fan_in:
        out.append(f"output.coeffs: length {len(net.out_coeffs)} != last width {fan_in}")
    return out


def check(net: NetworkSpec) -> None:
    problems = validate(net)
    if problems:
        raise ValidationError(problems)


def _run(net, inputs, combine, act, trace=None):
    """Shared forward recurrence.  ``combine(terms, bias)`` forms affine
    combinations and ``act`` is the ReLU, so the same code drives symbolic
    (Pwl) and pointwise (Fraction) evaluation."""
    if net.arch == "resnet_scalar":
        g = inputs[0]
        f = None
        for layer in net.layers:
            pre = combine([(layer.weights[0][0], g)], layer.biases[0])
            f = act(pre)
            if trace is not None:
                trace.pre.append([pre])
                trace.post.append([f])
            last_g = g
            g = combine([(layer.residual, f), (1, g)], 0)
        return combine([(net.out_coeffs[0], f), (1, last_g)], net.out_bias)

    prev = list(inputs)
    for layer in net.layers:
        posts, pres = [], []
        if net.arch == "dense_intra":
            for j in range(layer.width):
                terms = list(zip(layer.weights[j], prev))
                coeffs = layer.links[j] if layer.links is not None else [1] * j
                terms += [(-c, posts[l]) for l, c in enumerate(coeffs)]
                pre = combine(terms, layer.biases[j])
                pres.append(pre)
                posts.append(act(pre))
        else:
            j = 0
            for size in layer.groups():
                for l in range(size):
                    terms = list(zip(layer.weights[j], prev))
                    if l > 0:
                        terms.append((-1, posts[j - 1]))
                    pre = combine(terms, layer.biases[j])
                    pres.append(pre)
                    posts.append(act(pre))
                    j += 1
        if trace is not None:
            trace.pre.append(pres)
            trace.post.append(posts)
        prev = posts
    return combine(list(zip(net.out_coeffs, prev)), net.out_bias)


def _num_combine(terms, bias):
    return sum((rat(c) * v for c, v in terms), rat(bias))


def _num_relu(v):
    return v if v > 0 else Fraction(0)


def evaluate_point(net: NetworkSpec, x) -> Fraction:
    """Direct exact evaluation of the network at one input point."""
    xs = list(x) if isinstance(x, (tuple, list)) else [x]
    return _run(net, [rat(v) for v in xs], _num_combine, _num_relu)


def forward_symbolic(net: NetworkSpec, keep_trace: bool = False):
    """Exact Pwl of a univariate network (optionally with the neuron trace)."""
    check(net)
    if net.input_dim != 1:
        raise NetworkError("forward_symbolic handles input_dim = 1 only; use the 2-D enumerator")
    trace = ForwardTrace() if keep_trace else None
    out = _run(net, [Pwl.identity(net.domain)], linear_combination, relu, trace)
    if keep_trace:
        trace.output = out
        return out, trace
    return out


# -- serialization -----------------------------------------------------------


def _enc(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def to_dict(net: NetworkSpec) -> dict:
    layers = []
    for layer in net.layers:
        d = {
            "width": layer.width,
            "link_group": layer.link_group if isinstance(layer.link_group, int) else list(layer.link_group),
            "weights": [[_enc(v) for v in row] for row in layer.weights],
            "biases": [_enc(v) for v in layer.biases],
        }
        if layer.links is not None:
            d["links"] = [[_enc(v) for v in row] for row in layer.links]
        if layer.residual is not None:
            d["residual"] = _enc(layer.residual)
        layers.append(d)
    return {
        "input_dim": net.input_dim,
        "arch": net.arch,
        "layers": layers,
        "output": {"coeffs": [_enc(v) for v in net.out_coeffs], "bias": _enc(net.out_bias)},
        "domain": None if net.domain is None else [_enc(v) for v in net.domain],
    }


def serialize(net: NetworkSpec) -> bytes:
    return (json.dumps(to_dict(net), indent=2) + "\n").encode()


def _dec(value, where):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"{where}: expected a 'p/q' string, got {value!r}")
    try:
        return rat(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: bad rational {value!r} ({exc})") from None


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    return d[key]


def from_dict(doc) -> NetworkSpec:
    layers = []
    for i, ld in enumerate(_need(doc, "layers", "$")):
        where = f"layers[{i}]"
        weights = [
            [_dec(v, f"{where}.weights[{j}][{m}]") for m, v in enumerate(row)]
            for j, row in enumerate(_need(ld, "weights", where))
        ]
        biases = [_dec(v, f"{where}.biases[{j}]") for j, v in enumerate(_need(ld, "biases", where))]
        lg = _need(ld, "link_group", where)
        if isinstance(lg, list):
            lg = tuple(lg)
        elif not isinstance(lg, int) or isinstance(lg, bool):
            raise ParseError(f"{where}.link_group: expected integer")
        links = ld.get("links")
        if links is not None:
            links = [[_dec(v, f"{where}.links[{j}][{m}]") for m, v in enumerate(r)] for j, r in enumerate(links)]
        residual = ld.get("residual")
        if residual is not None:
            residual = _dec(residual, f"{where}.residual")
        width = _need(ld, "width", where)
        layer = LayerSpec.make(weights, biases, lg, links, residual)
        if width != layer.width:
            layer = replace(layer, width=width)
        layers.append(layer)
    out = _need(doc, "output", "$")
    coeffs = [_dec(v, f"output.coeffs[{j}]") for j, v in enumerate(_need(out, "coeffs", "output"))]
    bias = _dec(_need(out, "bias", "output"), "output.bias")
    dom = doc.get("domain")
    if dom is not None:
        if not isinstance(dom, list) or len(dom) != 2:
            raise ParseError("domain: expected [lo, hi] or null")
        dom = (_dec(dom[0], "domain[0]"), _dec(dom[1], "domain[1]"))
    return NetworkSpec.make(
        layers, coeffs, bias,
        arch=_need(doc, "arch", "$"), domain=dom, input_dim=_need(doc, "input_dim", "$"),
    )


def parse(data) -> NetworkSpec:
    """Parse a network-spec JSON document (bytes or str) and validate it."""
    if isinstance(data, bytes):
        data = data.decode()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    net = from_dict(doc)
    problems = validate(net)
    if problems:
        raise ParseError("; ".join(problems))
    return net


# -- first-layer rewrite ------------------------------------------------------


def _link_pair(a1, b1, c1_rows, a2, b2, c2_rows, at1=None, at2=None):
    """Rewrite ``c1*s(a1 x + b1) + c2*s(a2 x + b2)`` (same-sign slopes) as a
    linked pair.  ``c*_rows`` are the outgoing coefficients, one per consumer.
    Returns ``(first, second)`` neurons as ``(a, b, rows)``."""
    # first neuron must be the one whose active half-line lies inside the other's
    t1, t2 = -b1 / a1, -b2 / a2
    if (a1 > 0 and t1 < t2) or (a1 < 0 and t1 > t2):
        a1, b1, c1_rows, a2, b2, c2_rows = a2, b2, c2_rows, a1, b1, c1_rows
    if at1 is None:
        at1, at2 = a1, a1 + a2
    at1, at2 = rat(at1), rat(at2)
    if not (at1 * a1 > 0 and at2 * a1 > 0 and abs(at1) < abs(at2)):
        raise NotApplicable("need new slopes of the same sign with |a~1| < |a~2|")
    bt1, bt2 = b1 / a1 * at1, b2 / a2 * at2
    ct2 = [c2 * a2 / at2 for c2 in c2_rows]
    ct1 = [(c1 * a1 + c2 * a2 - c2t * (at2 - at1)) / at1 for c1, c2, c2t in zip(c1_rows, c2_rows, ct2)]
    return (at1, bt1, ct1), (at2, bt2, ct2)


def rewrite_first_layer_linked(net: NetworkSpec, slopes=None) -> NetworkSpec:
    """Link same-sign neuron pairs of a feedforward first layer without
    changing the network function.

    Neurons are paired greedily by slope sign; the pairs are moved to the front
    of the layer (the consumers' weight columns are permuted to match) and the
    layer's ``link_group`` becomes an explicit group list such as
    ``(2, 2, 1)``.  ``slopes`` optionally fixes ``(a~1, a~2)`` for every pair.
    """
    check(net)
    if net.arch != "layered" or net.input_dim != 1:
        raise NotApplicable("rewrite needs a layered univariate network")
    first = net.layers[0]
    if first.groups() != [1] * first.width:
        raise NotApplicable("first layer is already linked")
    if first.width <= 2:
        raise NotApplicable("first layer must be wider than 2")
    pos = [j for j in range(first.width) if first.weights[j][0] > 0]
    neg = [j for j in range(first.width) if first.weights[j][0] < 0]
    pairs = [tuple(pos[i:i + 2]) for i in range(0, len(pos) - 1, 2)]
    pairs += [tuple(neg[i:i + 2]) for i in range(0, len(neg) - 1, 2)]
    if not pairs:
        raise NotApplicable("no pair of first-layer neurons with same-sign slopes")
    paired = {j for p in pairs for j in p}
    singles = [j for j in range(first.width) if j not in paired]

    # consumer coefficient rows: next layer's weight columns, or output coeffs
    if len(net.layers) > 1:
        consumers = [list(row) for row in net.layers[1].weights]
    else:
        consumers = [list(net.out_coeffs)]

    def col(j):
        return [row[j] for row in consumers]

    new_w, new_b, new_cols = [], [], []
    for p, q in pairs:
        at = slopes if slopes is not None else (None, None)
        n1, n2 = _link_pair(
            first.weights[p][0], first.biases[p], col(p),
            first.weights[q][0], first.biases[q], col(q), *at,
        )
        for a, b, c in (n1, n2):
            new_w.append((a,))
            new_b.append(b)
            new_cols.append(c)
    for j in singles:
        new_w.append(first.weights[j])
        new_b.append(first.biases[j])
        new_cols.append(col(j))
    groups = tuple([2] * len(pairs) + [1] * len(singles))
    layer0 = LayerSpec(first.width, groups, tuple(new_w), tuple(new_b))
    rows = [tuple(c[r] for c in new_cols) for r in range(len(consumers))]
    if len(net.layers) > 1:
        nxt = replace(net.layers[1], weights=tuple(rows))
        layers = (layer0, nxt) + tuple(net.layers[2:])
        return replace(net, layers=layers)
    return replace(net, layers=(layer0,), out_coeffs=rows[0])


def permute_layer(net: NetworkSpec, index: int, perm) -> NetworkSpec:
    """Reorder neurons of a feedforward layer and the consumers' columns."""
    layer = net.layers[index]
    perm = list(perm)
    new = replace(
        layer,
        weights=tuple(layer.weights[p] for p in perm),
        biases=tuple(layer.biases[p] for p in perm),
    )
    layers = list(net.layers)
    layers[index] = new
    if index + 1 < len(layers):
        nxt = layers[index + 1]
        layers[index + 1] = replace(nxt, weights=tuple(tuple(row[p] for p in perm) for row in nxt.weights))
        return replace(net, layers=tuple(layers))
    return replace(net, layers=tuple(layers), out_coeffs=tuple(net.out_coeffs[p] for p in perm))
