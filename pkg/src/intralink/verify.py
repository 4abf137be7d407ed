"""Seeded property fuzzing and the depth-separation checker.

Every check here uses the exact engine as its oracle.  Reports are plain
dataclasses with a ``to_dict`` for JSON output; they never contain wall-clock
data unless explicitly asked for, so two runs with one seed serialize to the
same bytes.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import constructions as C
from .bounds import ArchShape, piece_upper_bound, shape_of
from .network import (LayerSpec, NetworkSpec, forward_symbolic, rewrite_first_layer_linked,
                      serialize)
from .pwl import Pwl, crossing_zero_points, new_breakpoints, relu

THEOREMS = ("k2_vs_2", "k2_vs_3", "k2_vs_k")


class ResourceError(ValueError):
    """Requested size is outside what the checker runs at desk scale."""


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    cases: int = 500
    max_width: int = 6
    max_depth: int = 4
    weight_bound: Fraction = Fraction(2)
    max_den: int = 64

    def check(self) -> None:
        if self.cases < 0 or self.max_width < 1 or self.max_depth < 1:
            raise ValueError("cases >= 0, max_width >= 1 and max_depth >= 1 required")
        if self.weight_bound <= 0 or self.max_den < 1:
            raise ValueError("weight_bound > 0 and max_den >= 1 required")


@dataclass
class FuzzReport:
    name: str
    seed: int
    cases: int
    violations: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "cases": self.cases,
                "violations": self.violations, "stats": self.stats, "ok": self.ok}


def _rand_rat(rng: random.Random, cfg: FuzzConfig) -> Fraction:
    den = rng.randint(1, cfg.max_den)
    top = int(cfg.weight_bound * den)
    return Fraction(rng.randint(-top, top), den)


def random_net(rng: random.Random, cfg: FuzzConfig, mode: str = "ff",
               input_dim: int = 1) -> NetworkSpec:
    """Random layered net; ``mode`` is ``ff`` or ``intra2``."""
    depth = rng.randint(1, cfg.max_depth)
    if mode == "intra2":
        choices = list(range(2, cfg.max_width + 1, 2)) or [2]
        group = 2
    elif mode == "ff":
        choices = list(range(1, cfg.max_width + 1))
        group = 1
    else:
        raise ValueError(f"random nets are ff or intra2, not {mode!r}")
    widths = [rng.choice(choices) for _ in range(depth)]
    layers, prev = [], input_dim
    for w in widths:
        weights = [[_rand_rat(rng, cfg) for _ in range(prev)] for _ in range(w)]
        biases = [_rand_rat(rng, cfg) for _ in range(w)]
        layers.append(LayerSpec.make(weights, biases, group))
        prev = w
    out = [_rand_rat(rng, cfg) for _ in range(prev)]
    return NetworkSpec.make(layers, out, _rand_rat(rng, cfg), input_dim=input_dim)


def fuzz_bound_soundness(cfg: FuzzConfig, mode: str = "ff") -> FuzzReport:
    cfg.check()
    rng = random.Random(f"soundness:{mode}:{cfg.seed}")
    report = FuzzReport(f"bound_soundness_{mode}", cfg.seed, cfg.cases)
    best_pieces, best_ratio = 0, Fraction(0)
    for case in range(cfg.cases):
        net = random_net(rng, cfg, mode)
        pieces = forward_symbolic(net).num_pieces
        upper = piece_upper_bound(shape_of(net)).upper
        best_pieces = max(best_pieces, pieces)
        best_ratio = max(best_ratio, Fraction(pieces, upper))
        if pieces > upper:
            report.violations.append({"case": case, "pieces": pieces, "upper": upper,
                                      "net": serialize(net).decode()})
    report.stats = {"max_pieces": best_pieces, "max_fraction_of_bound": str(best_ratio)}
    return report


def random_pwl(rng: random.Random, max_breaks: int = 8, bound: int = 8, den: int = 8) -> Pwl:
    n = rng.randint(0, max_breaks)
    xs = sorted(rng.sample(range(-bound * den, bound * den + 1), n))
    pick = lambda: Fraction(rng.randint(-bound * den, bound * den), den)  # noqa: E731
    points = [(Fraction(x, den), pick()) for x in xs]
    if not points:
        return Pwl.affine(pick(), pick())
    return Pwl.from_points(points, pick(), pick())


def fuzz_breakpoint_lemmas(cfg: FuzzConfig) -> FuzzReport:
    """Single-ReLU and linked-pair breakpoint caps on random rational PWLs.

    For ``s(g)``: the new breakpoints are exactly the crossing zeros of ``g``
    that are not already breakpoints of ``g``, and there are at most as many
    as ``g`` has pieces.  For the linked pair ``s(g2 - s(g1))`` the breakpoints
    outside ``g2`` and ``s(g1)`` number at most ``2w + 2``.
    """
    cfg.check()
    rng = random.Random(f"lemmas:{cfg.seed}")
    report = FuzzReport("breakpoint_lemmas", cfg.seed, cfg.cases)
    max_single, max_pair, pair_hits = 0, 0, 0
    for case in range(cfg.cases):
        g = random_pwl(rng)
        f = relu(g)
        new = new_breakpoints(f, g)
        expected = [z for z in crossing_zero_points(g) if z not in set(g.xs)]
        max_single = max(max_single, len(new))
        if new != expected or len(new) > g.num_pieces:
            report.violations.append({"case": case, "lemma": "single", "g": g.to_csv(),
                                      "new": [str(v) for v in new]})
        g1, g2 = random_pwl(rng, 4), random_pwl(rng, 4)
        f1 = relu(g1)
        f2 = relu(g2 - f1)
        w = g1.num_breakpoints + g2.num_breakpoints
        n2 = len(new_breakpoints(f2, g2, f1))
        max_pair = max(max_pair, n2)
        pair_hits += n2 == 2 * w + 2
        if n2 > 2 * w + 2:
            report.violations.append({"case": case, "lemma": "pair", "g1": g1.to_csv(),
                                      "g2": g2.to_csv(), "new": n2, "cap": 2 * w + 2})
    report.stats = {"max_new_single": max_single, "max_new_pair": max_pair,
                    "pair_cap_attained": pair_hits}
    return report


def random_rewritable(rng: random.Random, cfg: FuzzConfig) -> NetworkSpec:
    """Random feedforward net whose first layer is wider than 2 and holds two
    nonzero slopes of one sign."""
    while True:
        net = random_net(rng, cfg, "ff")
        first = net.layers[0]
        if first.width < 3:
            continue
        slopes = [row[0] for row in first.weights]
        if sum(a > 0 for a in slopes) >= 2 or sum(a < 0 for a in slopes) >= 2:
            return net


def fuzz_rewrite(cfg: FuzzConfig) -> FuzzReport:
    """Linking same-sign first-layer pairs must leave the function unchanged."""
    cfg.check()
    rng = random.Random(f"rewrite:{cfg.seed}")
    report = FuzzReport("first_layer_rewrite", cfg.seed, cfg.cases)
    pairs = 0
    for case in range(cfg.cases):
        net = random_rewritable(rng, cfg)
        linked = rewrite_first_layer_linked(net)
        pairs += sum(1 for s in linked.layers[0].groups() if s == 2)
        if forward_symbolic(linked) != forward_symbolic(net):
            report.violations.append({"case": case, "net": serialize(net).decode()})
    report.stats = {"linked_pairs": pairs}
    return report


# -- depth separation -----------------------------------------------------------------


@dataclass
class SeparationReport:
    theorem_id: str
    k: int
    deep_pieces: int
    shallow_feedforward_bound: int
    shallow_intra_pieces: int
    verdict: str
    feedforward_widths: list
    intra_widths: list
    formula_pieces: dict
    notes: list
    wall_time: Optional[float] = None

    @property
    def separated(self) -> bool:
        return self.verdict == "separated"

    def to_dict(self, include_time: bool = False) -> dict:
        d = {
            "theorem_id": self.theorem_id, "k": self.k,
            "deep_pieces": self.deep_pieces,
            "shallow_feedforward_bound": self.shallow_feedforward_bound,
            "shallow_intra_pieces": self.shallow_intra_pieces,
            "verdict": self.verdict,
            "feedforward_widths": self.feedforward_widths,
            "intra_widths": self.intra_widths,
            "formula_pieces": self.formula_pieces,
            "notes": self.notes,
        }
        if include_time:
            d["wall_time"] = self.wall_time
        return d


def _witness(result) -> tuple:
    """Exact engine count and closed-form count of a construction."""
    return forward_symbolic(result.net).num_pieces, result.guaranteed_pieces


def check_separation(theorem_id: str, k: int, allow_long: bool = False) -> SeparationReport:
    t0 = time.perf_counter()
    notes = []
    if theorem_id == "k2_vs_2":
        if not 2 <= k <= 30:
            raise ResourceError("k2_vs_2 runs for 2 <= k <= 30")
        intra = C.gen_all_linked_onelayer(2 * k)
        intra_n, intra_f = _witness(intra)
        # the deep width-2 witness represents this same function
        deep_n, deep_f = intra_n, intra_f
        ff_widths = [k * k - 2]
        intra_widths = [2 * k]
        notes.append("deep witness is the intra witness's function; its width-2 "
                     "representation is not built")
    elif theorem_id == "k2_vs_3":
        if (k - 1) % 3 or k < 10 or k > 40:
            raise ResourceError("k2_vs_3 needs k = 1 mod 3 with 10 <= k <= 40")
        w = 2 * (k - 1) // 3
        intra = C.gen_intra_twolayer(w, w)
        intra_n, intra_f = _witness(intra)
        deep_n, deep_f = intra_n, intra_f
        ff_widths = [k - 2, k - 2]
        intra_widths = [w, w]
        notes.append("deep witness is the intra witness's function; its width-2 "
                     "representation is not built")
    elif theorem_id == "k2_vs_k":
        if k < 1 or k > 3 or (k == 3 and not allow_long):
            raise ResourceError("k2_vs_k runs for k <= 2 (k = 3 needs allow_long)")
        deep = C.gen_telgarsky(6, k * k)
        deep_n, deep_f = _witness(deep)
        w = 4 * 6 ** (k - 1)
        intra = C.gen_intra_sawtooth([w] * k)
        intra_n, intra_f = _witness(intra)
        ff_widths = [6 ** k - 2] * k
        intra_widths = [w] * k
        notes.append("feedforward threshold uses width 6^k - 2; the theorem "
                     "statement says width below 6^k")
    else:
        raise ValueError(f"unknown theorem {theorem_id!r}; expected one of {THEOREMS}")
    ff_bound = piece_upper_bound(ArchShape.uniform(ff_widths, "ff")).upper
    agree = deep_n == deep_f and intra_n == intra_f
    if not agree:
        notes.append("engine and closed-form counts disagree")
    separated = agree and deep_n > ff_bound and intra_n >= deep_n
    return SeparationReport(
        theorem_id, k, deep_n, ff_bound, intra_n,
        "separated" if separated else "not-separated",
        ff_widths, intra_widths, {"deep": deep_f, "intra": intra_f}, notes,
        round(time.perf_counter() - t0, 3),
    )


# -- rendering ------------------------------------------------------------------------


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def separation_table(reports) -> str:
    head = ("theorem", "k", "deep", "ff_bound", "intra", "verdict")
    rows = [head] + [(r.theorem_id, str(r.k), str(r.deep_pieces), str(r.shallow_feedforward_bound),
                      str(r.shallow_intra_pieces), r.verdict) for r in reports]
    return _table(rows)


def fuzz_table(reports) -> str:
    rows = [("check", "seed", "cases", "violations")]
    rows += [(r.name, str(r.seed), str(r.cases), str(len(r.violations))) for r in reports]
    return _table(rows)


def _table(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"
