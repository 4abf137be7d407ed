"""The acceptance battery: eight criteria, each a function returning a
:class:`CriterionResult`.  The summary holds only exact data (no timings), so
two runs with one seed produce identical JSON."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import constructions as C
from .arrangement2d import enumerate_regions, fuzz_lift_oracle, fuzz_region_bound
from .bounds import ArchShape, piece_upper_bound
from .network import LayerSpec, NetworkSpec, forward_symbolic
from .pwl import is_sawtooth
from .verify import (FuzzConfig, check_separation, fuzz_bound_soundness,
                     fuzz_breakpoint_lemmas, fuzz_rewrite)

DEFAULTS = {
    "seed": 0,
    "soundness_cases": 500,
    "lemma_cases": 1000,
    "rewrite_cases": 200,
    "region_cases": 200,
    "lift_cases": 100,
    "k2_vs_2_k": 3,
    "k2_vs_3_k": 10,
    "k2_vs_k_k": [2],
    "allow_long": False,
}


class ConfigError(ValueError):
    pass


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "pass": self.passed,
                "details": self.details}


def load_config(text: str) -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = dict(DEFAULTS, **raw)
    for key, default in DEFAULTS.items():
        val = cfg[key]
        if isinstance(default, bool):
            ok = isinstance(val, bool)
        elif isinstance(default, int):
            ok = isinstance(val, int) and not isinstance(val, bool) and val >= 0
        else:
            ok = isinstance(val, list) and all(isinstance(v, int) for v in val)
        if not ok:
            raise ConfigError(f"bad value for {key}: {val!r}")
    return cfg


def criterion_1() -> CriterionResult:
    a = forward_symbolic(C.gen_twoproduct(3, 2).net).num_pieces
    b = forward_symbolic(C.gen_width3_4k(3, 3).net).num_pieces
    return CriterionResult(1, "feedforward tightness", a == 12 and b == 64,
                           {"twoproduct_3_2": a, "width3_4k_3_3": b})


def criterion_2() -> CriterionResult:
    n = forward_symbolic(C.gen_intra_twolayer(6, 4).net).num_pieces
    upper = piece_upper_bound(ArchShape.uniform([6, 4], "intra2")).upper
    return CriterionResult(2, "pairwise-linked tightness", n == 70 == upper,
                           {"intra_twolayer_6_4": n, "upper": upper})


def criterion_3() -> CriterionResult:
    got = {}
    got["intra_sawtooth_4"] = forward_symbolic(C.gen_intra_sawtooth([4]).net).num_pieces
    got["intra_sawtooth_4_4"] = forward_symbolic(C.gen_intra_sawtooth([4, 4]).net).num_pieces
    res = forward_symbolic(C.gen_resnet_sawtooth(10).net)
    got["resnet_10"] = res.num_pieces
    got["resnet_10_sawtooth"] = is_sawtooth(res, 2 ** 10, (-2, 2))
    got["width2_intra_5"] = forward_symbolic(C.gen_width2_intra(5).net).num_pieces
    got["all_linked_onelayer_6"] = forward_symbolic(C.gen_all_linked_onelayer(6).net).num_pieces
    got["all_linked_9k_2"] = forward_symbolic(C.gen_all_linked_9k(2).net).num_pieces
    got["dense_net_3_3"] = forward_symbolic(C.gen_densenet([3, 3]).net).num_pieces
    ok = (got["intra_sawtooth_4"] == 6 and got["intra_sawtooth_4_4"] == 36
          and got["resnet_10"] == 1024 and got["resnet_10_sawtooth"]
          and got["width2_intra_5"] >= 191 and got["all_linked_onelayer_6"] == 22
          and got["all_linked_9k_2"] >= 81 and got["dense_net_3_3"] >= 50)
    return CriterionResult(3, "sawtooth constructions", ok, got)


def criterion_4(cfg: dict) -> CriterionResult:
    seed = cfg["seed"]
    reports = [
        fuzz_bound_soundness(FuzzConfig(seed, cfg["soundness_cases"]), "ff"),
        fuzz_bound_soundness(FuzzConfig(seed, cfg["soundness_cases"]), "intra2"),
        fuzz_breakpoint_lemmas(FuzzConfig(seed, cfg["lemma_cases"])),
    ]
    return CriterionResult(4, "bound soundness fuzz", all(r.ok for r in reports),
                           {r.name: r.to_dict() for r in reports})


def criterion_5(cfg: dict) -> CriterionResult:
    reps = [check_separation("k2_vs_2", cfg["k2_vs_2_k"]),
            check_separation("k2_vs_3", cfg["k2_vs_3_k"])]
    reps += [check_separation("k2_vs_k", k, cfg["allow_long"]) for k in cfg["k2_vs_k_k"]]
    ok = all(r.separated for r in reps)
    # the gating integers at the default sizes
    expect = {("k2_vs_2", 3): (22, 8, 22), ("k2_vs_3", 10): (100, 81, 100),
              ("k2_vs_k", 2): (1296, 1225, 1296)}
    for r in reps:
        want = expect.get((r.theorem_id, r.k))
        if want and (r.deep_pieces, r.shallow_feedforward_bound, r.shallow_intra_pieces) != want:
            ok = False
    return CriterionResult(5, "depth separation", ok,
                           {f"{r.theorem_id}_k{r.k}": r.to_dict() for r in reps})


def criterion_6(cfg: dict) -> CriterionResult:
    r = fuzz_rewrite(FuzzConfig(cfg["seed"], cfg["rewrite_cases"]))
    return CriterionResult(6, "first-layer rewrite", r.ok, r.to_dict())


def generic_four_lines() -> NetworkSpec:
    """Width-4 layer on two inputs whose four lines are in general position
    inside [-2, 2]^2."""
    layer = LayerSpec.make([[1, 0], [0, 1], [1, 1], [1, -2]], [0, 0, -1, Fraction(1, 2)])
    return NetworkSpec.make([layer], [1, 2, 3, 5], 0, input_dim=2)


def criterion_7(cfg: dict) -> CriterionResult:
    seed = cfg["seed"]
    lift = fuzz_lift_oracle(FuzzConfig(seed, cfg["lift_cases"], max_width=4, max_depth=3))
    regions = fuzz_region_bound(FuzzConfig(seed, cfg["region_cases"], max_width=4, max_depth=2))
    generic = enumerate_regions(generic_four_lines(), (-2, 2, -2, 2)).merged_region_count
    ok = lift.ok and regions.ok and generic == 11
    return CriterionResult(7, "2-D region census", ok,
                           {"lift": lift.to_dict(), "regions": regions.to_dict(),
                            "generic_width4": generic})


def run_criterion(n: int, cfg: dict) -> CriterionResult:
    if n in (1, 2, 3):
        return globals()[f"criterion_{n}"]()
    if n in (4, 5, 6, 7):
        return globals()[f"criterion_{n}"](cfg)
    raise ValueError(f"criterion {n} is not a single check")


def run_suite(cfg: dict) -> dict:
    """Criteria 1 to 7; criterion 8 (determinism) is checked by running this
    twice and comparing :func:`summary_json` output."""
    results = [run_criterion(n, cfg) for n in range(1, 8)]
    return {"seed": cfg["seed"], "config": cfg,
            "criteria": [r.to_dict() for r in results],
            "all_pass": all(r.passed for r in results)}


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
