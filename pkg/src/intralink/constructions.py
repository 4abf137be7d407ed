"""Explicit networks with known piece counts.

Each generator returns a :class:`ConstructionResult` holding the network and
the piece count it guarantees.  Free parameters that are only constrained to
an open interval are fixed to concrete rationals here; :func:`audit` checks
the exact piece count of every generated network.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from math import prod

from .network import LayerSpec, NetworkSpec, forward_symbolic
from .pwl import Pwl

KINDS = (
    "twoproduct", "width3_4k", "intra_twolayer", "intra_sawtooth", "width2_intra",
    "all_linked_onelayer", "all_linked_5k", "all_linked_9k", "resnet_sawtooth",
    "dense_net", "telgarsky_base_m",
)

# constructions whose guaranteed count is exact
TIGHT = {"twoproduct", "width3_4k", "intra_twolayer", "all_linked_onelayer",
         "resnet_sawtooth", "intra_sawtooth", "telgarsky_base_m"}


class HypothesisViolation(ValueError):
    pass


class AuditFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstructionResult:
    kind: str
    params: dict
    net: NetworkSpec
    guaranteed_pieces: int
    claim_ref: str
    exact: bool


def _require(cond, msg):
    if not cond:
        raise HypothesisViolation(msg)


class _Builder:
    """Accumulates layers; neurons of a new layer are given as
    ``(alpha, beta)`` acting on the scalar ``t = <c, f_prev> + d`` carried
    over from the previous layer (``t = x`` for the first layer)."""

    def __init__(self):
        self.layers = []
        self.carry = ((F(1),), F(0))  # coefficients on previous neurons, bias

    def layer(self, neurons, link_group=1, links=None):
        coeffs, d = self.carry
        weights = [tuple(F(a) * c for c in coeffs) for a, _ in neurons]
        biases = [F(a) * d + F(b) for a, b in neurons]
        self.layers.append(LayerSpec.make(weights, biases, link_group, links))

    def combine(self, coeffs, bias=0):
        self.carry = (tuple(F(c) for c in coeffs), F(bias))

    def net(self, domain=None, arch="layered"):
        coeffs, d = self.carry
        return NetworkSpec.make(self.layers, coeffs, d, arch=arch, domain=domain)


# -- feedforward tightness -----------------------------------------------------


def _zigzag_first_layer(w):
    """``w`` neurons on x whose combination zigzags between 0 and 1 with
    ``w + 1`` pieces; both rays climb away from the band, so every piece
    sweeps [0, 1].  Returns ``(neurons, coeffs, bias)``."""
    kinks = [F(0), F(1), F(2)]
    slopes = [F(-1), F(1), F(-1), F(2)]
    for i in range(3, w):
        kinks.append(kinks[-1] + (F(1, 2) if i == 3 else 1))
        slopes.append(F((-1) ** (i + 2)))
    neurons, coeffs = [], []
    for i, t in enumerate(kinks):
        # kinks 1 and 2 use falling units so the left ray gets slope -1
        a = -1 if i in (1, 2) else 1
        neurons.append((a, -a * t))
        coeffs.append(slopes[i + 1] - slopes[i])
    at0 = sum(c * max(F(a) * 0 + b, F(0)) for (a, b), c in zip(neurons, coeffs))
    return neurons, coeffs, -at0


def gen_twoproduct(w1: int, w2: int) -> ConstructionResult:
    _require(w1 >= 3 and w2 >= 2, "twoproduct needs w1 >= 3, w2 >= 2")
    b = _Builder()
    neurons, coeffs, bias = _zigzag_first_layer(w1)
    b.layer(neurons)
    b.combine(coeffs, bias)
    # one falling unit keeps the troughs, rising units keep the peaks
    levels = [F(j, w2 + 1) for j in range(1, w2 + 1)]
    b.layer([(-1, levels[0])] + [(1, -t) for t in levels[1:]])
    b.combine([1] * w2)
    return ConstructionResult("twoproduct", {"w1": w1, "w2": w2}, b.net(),
                              (w1 + 1) * (w2 + 1), "ff_prod(w+1)", True)


# h(u) = s(2u - 1/3) + s(2/3 - u) - s(3u/2 - 1/2) zigzags between 1/2 and 2/3
_H_UNITS = [(2, F(-1, 3)), (-1, F(2, 3)), (F(3, 2), F(-1, 2))]
_H_COEFFS = [1, 1, -1]


def gen_width3_4k(w: int, k: int) -> ConstructionResult:
    _require(w >= 3 and k >= 2, "width3_4k needs w >= 3, k >= 2")
    b = _Builder()
    neurons, coeffs, bias = _zigzag_first_layer(w)
    b.layer(neurons)
    b.combine(coeffs, bias)
    b.layer(_H_UNITS)
    for _ in range(2, k):
        # rescale the band [1/2, 2/3] back to [0, 1]
        b.combine([6 * c for c in _H_COEFFS], -3)
        b.layer(_H_UNITS)
    b.combine(_H_COEFFS)
    return ConstructionResult("width3_4k", {"w": w, "k": k}, b.net(),
                              (w + 1) * 4 ** (k - 1), "ff_prod(w+1)", True)


def gen_telgarsky(m: int, d: int) -> ConstructionResult:
    """d-fold composition of the m-fold mirror map on [0, 1]."""
    _require(m >= 2 and d >= 1, "telgarsky needs m >= 2, d >= 1")
    # mirror map: slopes +-m, kinks at j/m, range [0, 1]
    coeffs = [m] + [2 * m * (-1) ** j for j in range(1, m)]
    b = _Builder()
    for _ in range(d):
        b.layer([(1, -F(j, m)) for j in range(m)])
        b.combine(coeffs)
    return ConstructionResult("telgarsky_base_m", {"m": m, "d": d}, b.net(domain=(0, 1)),
                              m ** d, "telgarsky_m^d", True)


# -- intra-linked sawtooth -------------------------------------------------------


def _xi_gadget(delta_total, w):
    """Linked pairs turning t in [0, D] into a 3w/2-piece wave of height
    2D/(3w).  Returns ``(neurons, coeffs, bias)``."""
    d = F(2) * delta_total / (3 * w)
    neurons = [(3, -3 * d), (1, d)]
    coeffs = [F(1, 3), F(1)]
    for j in range(1, w // 2):
        neurons += [(4, -4 * (3 * j + 1) * d), (2, -6 * j * d)]
        sgn = (-1) ** j
        coeffs += [F(sgn, 2), F(sgn)]
    return neurons, coeffs, -d


def gen_intra_sawtooth(widths) -> ConstructionResult:
    widths = list(widths)
    _require(widths and all(w >= 2 and w % 2 == 0 for w in widths),
             "intra_sawtooth needs even widths >= 2")
    b = _Builder()
    span = F(1)
    for w in widths:
        neurons, coeffs, bias = _xi_gadget(span, w)
        b.layer(neurons, link_group=2)
        b.combine(coeffs, bias)
        span = span * 2 / (3 * w)
    pieces = prod(3 * w // 2 for w in widths)
    return ConstructionResult("intra_sawtooth", {"widths": widths}, b.net(domain=(0, 1)),
                              pieces, "intra_prod(3w/2)", True)


# -- ResNet ----------------------------------------------------------------------


def gen_resnet_sawtooth(k: int) -> ConstructionResult:
    _require(k >= 1, "resnet_sawtooth needs k >= 1")
    layers = []
    for i in range(1, k + 1):
        bias = F(0) if i == 1 else 2 - F(2) ** (2 - i)
        layers.append(LayerSpec.make([[1]], [bias], 1, residual=-2))
    net = NetworkSpec.make(layers, [-2], 0, arch="resnet_scalar")
    return ConstructionResult("resnet_sawtooth", {"k": k}, net, 2 ** k, "resnet_2^k", True)


# -- width-2 intra-linked --------------------------------------------------------


def gen_width2_intra(k: int) -> ConstructionResult:
    """Triangle-trapezoid-triangle recursion in a 2-wide linked network.

    The first layer builds the tent ``T`` on [-1, 1]; each later layer maps
    ``T`` in [0, 1] to ``s(2 - 4T)/4 + s(3/2 - 2T - s(2 - 4T)) - 3/8``, which is
    flat for ``T >= 3/4``.  Feeding back ``T = (c - f) / (2c)`` with ``c = 1/8``
    splits every TTT segment into three.
    """
    _require(k >= 2, "width2_intra needs k >= 2")
    b = _Builder()
    b.layer([(2, 0), (1, 1)], link_group=2)
    b.combine([0, 1])
    b.layer([(-4, 2), (-2, F(3, 2))], link_group=2)
    for _ in range(3, k + 1):
        b.combine([-1, -4], 2)
        b.layer([(-4, 2), (-2, F(3, 2))], link_group=2)
    b.combine([F(1, 4), 1], F(-3, 8))
    return ConstructionResult("width2_intra", {"k": k}, b.net(),
                              7 * 3 ** (k - 2) + 2, "width2_intra_7*3^(k-2)+2", False)


# -- all-linked ------------------------------------------------------------------


def gen_all_linked_onelayer(w: int) -> ConstructionResult:
    """One all-linked layer where neuron j adds j new breakpoints.

    Neuron j+1 gets the line ``s * (x + j + 1)``; its slope is half the largest
    slope that still keeps the line below the lowest nonzero peak of neuron j.
    """
    _require(w >= 1, "all_linked_onelayer needs w >= 1")
    from .pwl import linear_combination, relu

    x = Pwl.identity()
    units = [(F(1), F(1))]
    f = relu(x + 1)
    for j in range(1, w):
        if j == 1:
            s = F(1, 2)
        else:
            peaks = [(px, py) for px, py in f.breakpoints if py != 0]
            px, py = min(peaks, key=lambda p: (p[1], p[0]))
            s = py / (px + j + 1) / 2
        units.append((s, s * (j + 1)))
        f = relu(linear_combination([(s, x)], s * (j + 1)) - f)
    b = _Builder()
    b.layer(units, link_group=w)
    b.combine([F(1, 2 ** j) for j in range(w)])
    return ConstructionResult("all_linked_onelayer", {"w": w}, b.net(),
                              (w + 1) * w // 2 + 1, "all_prod(w(w+1)/2+1)", True)


def _chain_units(n):
    """Units of the all-linked chain s(2x), s(x+1-.), s((x+2)/3-.), s((x+3)/9-.)."""
    return [(2, 0), (1, 1), (F(1, 3), F(2, 3)), (F(1, 9), F(1, 3))][:n]


# eta = f4 + 5/84 f3 - 1/3 f2: every bounded piece on [-3, 1] sweeps [5/504, 5/252]
_ETA = [0, F(-1, 3), F(5, 84), 1]
_ETA_M, _ETA_B = F(504), F(17, 2)
# xi = 6 f3 + 2 f2 - 2 f1 zigzags 0, 2, 1, 2, 1/2, 2 and then falls; pieces sweep [1, 2]
_XI = [-2, 2, 6]
_XI_T, _XI_C = F(-4), F(-11, 2)


def _all_linked_stack(width, coeffs, stretch, shift, k):
    b = _Builder()
    units = _chain_units(width)
    b.layer(units, link_group=width)
    for _ in range(1, k):
        # window map t = stretch * out - shift onto the active interval
        b.combine([stretch * c for c in coeffs], -shift)
        b.layer(units, link_group=width)
    b.combine(coeffs)
    return b.net()


def gen_all_linked_9k(k: int) -> ConstructionResult:
    _require(k >= 1, "all_linked_9k needs k >= 1")
    net = _all_linked_stack(4, _ETA, _ETA_M, _ETA_B, k)
    params = {"k": k, "M": str(_ETA_M), "B": str(_ETA_B)}
    return ConstructionResult("all_linked_9k", params, net, 9 ** k, "all_linked_9^k", False)


def gen_all_linked_5k(k: int) -> ConstructionResult:
    _require(k >= 1, "all_linked_5k needs k >= 1")
    net = _all_linked_stack(3, _XI, _XI_T, _XI_C, k)
    params = {"k": k, "T": str(_XI_T), "C": str(_XI_C)}
    return ConstructionResult("all_linked_5k", params, net, 5 ** k, "all_linked_5^k", False)


# -- pairwise-linked two-layer tightness -----------------------------------------


# zigzag first layer; every piece of its output sweeps the band (-13/2, -6)
_TWOLAYER_BAND = (F(-13, 2), F(-6))


def _twolayer_first(w1):
    neurons = [(F(9, 2), -27), (F(3, 2), 0), (-2, 4), (-1, 3), (F(-7, 2), F(-7, 4)), (-2, 8)]
    coeffs = [F(-2, 9), F(-1), F(1, 2), F(1), F(-4, 7), F(-1)]
    for j in range(7, w1 + 1, 2):
        aj = F(-19, 2) - 9 * (F(j - 1, 2) - 3)
        neurons += [(-5, -5 * (3 - aj)), (-2, 2 * aj)]
        s = (-1) ** ((j + 1) // 2)
        coeffs += [F(2, 5) * s, F(s)]
    return neurons, coeffs


def gen_intra_twolayer(w1: int, w2: int) -> ConstructionResult:
    """Pairwise-linked two-layer network with (3w1/2+1)(3w2/2+1) pieces.

    The second layer holds w2/2 pairs acting on the first-layer zigzag z.
    Pair i owns a slice of the band and places kinks at its quarter points
    u1 < u2 < u3: rising pairs compute s(2(z-u2)), s(z-u1-.), falling pairs
    s(-2(z-u2)), s(u3-z-.).  Alternating directions keep the output slope
    nonzero on both sides of the band, so no first-layer breakpoint is lost.
    """
    _require(w1 >= 6 and w1 % 2 == 0 and w2 >= 4 and w2 % 2 == 0,
             "intra_twolayer needs even w1 >= 6 and even w2 >= 4")
    lo, hi = _TWOLAYER_BAND
    neurons, coeffs = _twolayer_first(w1)
    b = _Builder()
    b.layer(neurons, link_group=2)
    b.combine(coeffs)
    m = w2 // 2
    step = (hi - lo) / m
    units = []
    for i in range(m):
        u1, u2, u3 = (lo + step * i + step * F(r, 4) for r in (1, 2, 3))
        if i % 2 == 0:
            units += [(2, -2 * u2), (1, -u1)]
        else:
            units += [(-2, 2 * u2), (-1, u3)]
    b.layer(units, link_group=2)
    b.combine([2, 1] * m)
    pieces = (3 * w1 // 2 + 1) * (3 * w2 // 2 + 1)
    return ConstructionResult("intra_twolayer", {"w1": w1, "w2": w2}, b.net(),
                              pieces, "intra2_prod(3w/2+1)", True)


# -- dense intra-layer links -----------------------------------------------------


_DENSE_UNITS = [(3, 0), (F(3, 2), 3), (F(1, 2), 2)]
_DENSE_LINKS = [[], [1], [F(1, 3), 1]]
# 2x2 solve: slopes of g on the first two pieces of (-inf, 4] must be +-1/8
_DENSE_COEFFS = [F(1, 24), F(1, 4), F(1)]


def gen_densenet(widths) -> ConstructionResult:
    """Dense intra-linked layers of width 3.  Each layer's output zigzags in
    [1/2, 3/4] with 7 oscillating pieces; ``48 g - 30`` maps that band onto
    [-6, 6], which strictly contains every kink of the next layer."""
    widths = list(widths)
    _require(widths and all(w == 3 for w in widths),
             "dense_net is only constructed for widths all equal to 3")
    b = _Builder()
    b.layer(_DENSE_UNITS, links=_DENSE_LINKS)
    for _ in widths[1:]:
        b.combine([48 * c for c in _DENSE_COEFFS], -30)
        b.layer(_DENSE_UNITS, links=_DENSE_LINKS)
    b.combine(_DENSE_COEFFS)
    pieces = 1 + prod(2 ** w - 1 for w in widths)
    return ConstructionResult("dense_net", {"widths": widths}, b.net(arch="dense_intra"),
                              pieces, "dense_1+prod(2^w-1)", False)


# -- catalog ---------------------------------------------------------------------


_GENERATORS = {
    "twoproduct": (gen_twoproduct, ("w1", "w2")),
    "width3_4k": (gen_width3_4k, ("w", "k")),
    "intra_twolayer": (gen_intra_twolayer, ("w1", "w2")),
    "intra_sawtooth": (gen_intra_sawtooth, ("widths",)),
    "width2_intra": (gen_width2_intra, ("k",)),
    "all_linked_onelayer": (gen_all_linked_onelayer, ("w",)),
    "all_linked_5k": (gen_all_linked_5k, ("k",)),
    "all_linked_9k": (gen_all_linked_9k, ("k",)),
    "resnet_sawtooth": (gen_resnet_sawtooth, ("k",)),
    "dense_net": (gen_densenet, ("widths",)),
    "telgarsky_base_m": (gen_telgarsky, ("m", "d")),
}


def param_names(kind: str) -> tuple:
    if kind not in _GENERATORS:
        raise KeyError(f"unknown construction kind {kind!r}")
    return _GENERATORS[kind][1]


def construct(kind: str, **params) -> ConstructionResult:
    """Dispatch by kind name; parameters are passed by keyword."""
    gen, names = _GENERATORS[kind] if kind in _GENERATORS else (None, None)
    if gen is None:
        raise KeyError(f"unknown construction kind {kind!r}; expected one of {KINDS}")
    missing = [n for n in names if n not in params]
    extra = [n for n in params if n not in names]
    if missing or extra:
        raise TypeError(f"{kind} takes parameters {names}; missing {missing}, unexpected {extra}")
    return gen(*(params[n] for n in names))


def audit(result: ConstructionResult, pwl: Pwl = None) -> int:
    """Exact piece count of ``result``; raises AuditFailure when the count
    misses the guarantee (or differs from it for tight constructions)."""
    f = pwl if pwl is not None else forward_symbolic(result.net)
    n = f.num_pieces
    if n < result.guaranteed_pieces or (result.exact and n != result.guaranteed_pieces):
        raise AuditFailure(
            f"{result.kind}{result.params}: {n} pieces, guaranteed "
            f"{'exactly ' if result.exact else ''}{result.guaranteed_pieces}")
    return n
