"""Closed-form piece and region bounds, as exact Python integers."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, prod
from typing import Optional, Sequence

MODES = ("ff", "intra2", "all", "resnet", "dense")
_MODE_ALIASES = {"1": "ff", "feedforward": "ff", "2": "intra2", "pairwise": "intra2",
                 "all_linked": "all", "resnet_scalar": "resnet", "dense_intra": "dense"}


class HypothesisViolation(ValueError):
    pass


def normalize_mode(mode) -> str:
    m = str(mode).strip().lower()
    m = _MODE_ALIASES.get(m, m)
    if m not in MODES:
        raise ValueError(f"unknown link mode {mode!r}; expected one of {MODES}")
    return m


@dataclass(frozen=True)
class ArchShape:
    widths: tuple
    modes: tuple
    input_dim: int = 1

    @staticmethod
    def uniform(widths: Sequence[int], mode="ff", input_dim: int = 1) -> "ArchShape":
        m = normalize_mode(mode)
        return ArchShape(tuple(int(w) for w in widths), (m,) * len(widths), input_dim)

    def check(self) -> None:
        if not self.widths:
            raise HypothesisViolation("at least one hidden layer")
        if len(self.modes) != len(self.widths):
            raise HypothesisViolation("one link mode per layer")
        if any(w < 1 for w in self.widths):
            raise HypothesisViolation("widths must be positive")
        if self.input_dim < 1:
            raise HypothesisViolation("input_dim must be positive")
        for w, m in zip(self.widths, self.modes):
            if m == "intra2" and w % 2:
                raise HypothesisViolation(f"pairwise-linked layers need even widths (got {w})")
            if m == "resnet" and w != 1:
                raise HypothesisViolation("resnet_scalar layers have width 1")
        if "resnet" in self.modes and set(self.modes) != {"resnet"}:
            raise HypothesisViolation("resnet_scalar cannot be mixed with other modes")


@dataclass(frozen=True)
class BoundReport:
    upper: int
    formula_id: str
    construction_lower: Optional[int] = None


def _layer_factor(w: int, mode: str) -> int:
    if mode == "ff":
        return w + 1
    if mode == "intra2":
        return 3 * w // 2 + 1
    if mode == "all":
        return (w + 1) * w // 2 + 1
    raise HypothesisViolation(f"no closed-form per-layer factor for mode {mode!r}")


def width2_feedforward_bound(k: int) -> int:
    """Feedforward width-2 networks with k hidden layers."""
    if k % 2 == 0:
        return 7 ** (k // 2)
    return 3 * 7 ** ((k - 1) // 2)


def piece_upper_bound(shape: ArchShape, construction_lower: Optional[int] = None) -> BoundReport:
    shape.check()
    if shape.input_dim != 1:
        raise HypothesisViolation("piece bounds are univariate; use region_upper_bound")
    modes = set(shape.modes)
    k = len(shape.widths)
    if modes == {"resnet"}:
        upper, fid = 2 ** k, "resnet_2^k"
    elif "dense" in modes:
        raise HypothesisViolation("no upper bound is available for dense intra-layer links")
    elif modes == {"ff"} and k >= 2 and all(w == 2 for w in shape.widths):
        upper, fid = width2_feedforward_bound(k), "width2_sqrt7"
    else:
        upper = prod(_layer_factor(w, m) for w, m in zip(shape.widths, shape.modes))
        fid = {frozenset({"ff"}): "ff_prod(w+1)", frozenset({"intra2"}): "intra2_prod(3w/2+1)",
               frozenset({"all"}): "all_prod(w(w+1)/2+1)"}.get(frozenset(modes), "mixed_prod")
    if construction_lower is not None and construction_lower > upper:
        raise ValueError(f"construction lower {construction_lower} exceeds upper {upper}")
    return BoundReport(upper, fid, construction_lower)


def zaslavsky_sum(m: int, n: int) -> int:
    """Maximum number of regions cut by m hyperplanes in R^n."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    return sum(comb(m, j) for j in range(n + 1))


def region_upper_bound(shape: ArchShape) -> int:
    """Per-layer product of Zaslavsky sums.  Pairwise-linked layers use
    ``3w/2 + 1`` hyperplanes, feedforward layers ``w``."""
    shape.check()
    total = 1
    for w, m in zip(shape.widths, shape.modes):
        if m == "ff":
            total *= zaslavsky_sum(w, shape.input_dim)
        elif m == "intra2":
            total *= zaslavsky_sum(3 * w // 2 + 1, shape.input_dim)
        else:
            raise HypothesisViolation(f"no region bound for mode {m!r}")
    return total


def dense_lower_bound(widths: Sequence[int]) -> int:
    if not widths:
        raise ValueError("widths must be nonempty")
    return 1 + prod(2 ** w - 1 for w in widths)


def shape_of(net) -> ArchShape:
    """Derive the ArchShape of a NetworkSpec."""
    if net.arch == "resnet_scalar":
        modes = ("resnet",) * len(net.layers)
    elif net.arch == "dense_intra":
        modes = ("dense",) * len(net.layers)
    else:
        modes = []
        for layer in net.layers:
            g = layer.groups()
            if all(s == 1 for s in g):
                modes.append("ff")
            elif all(s == 2 for s in g):
                modes.append("intra2")
            elif g == [layer.width]:
                modes.append("all")
            else:
                modes.append("mixed")
        modes = tuple(modes)
    return ArchShape(tuple(l.width for l in net.layers), modes, net.input_dim)
