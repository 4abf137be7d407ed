"""Command-line front end.

Exit codes: 0 success, 1 verification finding, 2 usage or input error.
The default seed comes from ``INTRALINK_SEED`` when ``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import arrangement2d as A
from . import constructions as C
from . import suite as S
from . import verify as V
from .bounds import (ArchShape, HypothesisViolation, dense_lower_bound, normalize_mode,
                     piece_upper_bound, region_upper_bound, shape_of)
from .network import NetworkError, evaluate_point, forward_symbolic, parse, serialize
from .pwl import PwlError, analyze, points_csv, rat, read_breakpoints_csv

SEED_ENV = "INTRALINK_SEED"
EXIT_OK, EXIT_FINDING, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")


def _load_net(path: str):
    try:
        return parse(_read(path))
    except NetworkError as exc:
        raise UsageError(f"{path}: {exc}")


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"{out}: {exc.strerror}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands -----------------------------------------------------------------------


def cmd_construct(args) -> int:
    names = C.param_names(args.kind)
    params = {}
    for n in names:
        val = getattr(args, n)
        if val is None:
            raise UsageError(f"--{n} is required for {args.kind}")
        params[n] = val
    try:
        result = C.construct(args.kind, **params)
    except C.HypothesisViolation as exc:
        raise UsageError(str(exc))
    if args.out:
        _emit(serialize(result.net).decode(), args.out)
    f = forward_symbolic(result.net)
    pieces = f.num_pieces
    ok = pieces >= result.guaranteed_pieces and (not result.exact or pieces == result.guaranteed_pieces)
    report = {"kind": result.kind, "params": result.params, "pieces": pieces,
              "guaranteed": result.guaranteed_pieces, "exact": result.exact,
              "claim": result.claim_ref, "audit": "pass" if ok else "fail"}
    if args.json:
        _emit(_dump(report), "-")
    else:
        print(f"kind={result.kind} pieces={pieces} guaranteed={result.guaranteed_pieces} "
              f"{'exact' if result.exact else 'at-least'} audit={report['audit']}")
    return EXIT_OK if ok else EXIT_FINDING


def cmd_eval(args) -> int:
    net = _load_net(args.net)
    for raw in args.x:
        try:
            parts = [rat(v) for v in raw.split(",")]
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad point {raw!r}: {exc}")
        point = parts[0] if len(parts) == 1 else tuple(parts)
        try:
            value = evaluate_point(net, point)
        except (NetworkError, PwlError) as exc:
            raise UsageError(str(exc))
        print(f"{raw}\t{value}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    net = _load_net(args.net)
    f = forward_symbolic(net)
    rep = analyze(f)
    out = {"pieces": rep.pieces, "breakpoints": rep.breakpoints,
           "crossing_zeros": rep.crossing_zeros, "distinct_zeros": rep.distinct_zeros}
    try:
        out["upper_bound"] = piece_upper_bound(shape_of(net)).upper
    except HypothesisViolation:
        out["upper_bound"] = None
    _emit(_dump(out), "-")
    if out["upper_bound"] is not None and rep.pieces > out["upper_bound"]:
        return EXIT_FINDING
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        mode = normalize_mode(args.mode)
        if mode == "dense":
            value, kind = dense_lower_bound(args.widths), "dense_lower"
        elif args.input_dim > 1 or args.regions:
            value = region_upper_bound(ArchShape.uniform(args.widths, mode, args.input_dim))
            kind = "region_upper"
        else:
            value = piece_upper_bound(ArchShape.uniform(args.widths, mode)).upper
            kind = "piece_upper"
    except (HypothesisViolation, ValueError) as exc:
        raise UsageError(str(exc))
    if args.json:
        _emit(_dump({"kind": kind, "value": value, "widths": args.widths, "mode": mode,
                     "input_dim": args.input_dim}), "-")
    else:
        print(value)
    return EXIT_OK


def cmd_fuzz(args) -> int:
    cfg = V.FuzzConfig(args.seed, args.cases, args.max_width, args.max_depth)
    if args.check == "soundness":
        reports = [V.fuzz_bound_soundness(cfg, m) for m in args.modes]
    elif args.check == "lemmas":
        reports = [V.fuzz_breakpoint_lemmas(cfg)]
    elif args.check == "rewrite":
        reports = [V.fuzz_rewrite(cfg)]
    elif args.check == "regions":
        reports = [A.fuzz_region_bound(cfg)]
    else:
        reports = [A.fuzz_lift_oracle(cfg)]
    if args.json:
        _emit(_dump([r.to_dict() for r in reports]), args.json)
    sys.stdout.write(V.fuzz_table(reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FINDING


def cmd_separation(args) -> int:
    try:
        rep = V.check_separation(args.theorem, args.k, args.allow_long)
    except V.ResourceError as exc:
        raise UsageError(str(exc))
    if args.json:
        _emit(_dump(rep.to_dict()), args.json)
    sys.stdout.write(V.separation_table([rep]))
    for note in rep.notes:
        print(f"note: {note}")
    return EXIT_OK if rep.separated else EXIT_FINDING


def cmd_regions(args) -> int:
    net = _load_net(args.net)
    try:
        dec = A.enumerate_regions(net, args.box)
    except A.RegionError as exc:
        raise UsageError(str(exc))
    try:
        upper = region_upper_bound(shape_of(net))
    except HypothesisViolation:
        upper = None
    if args.json:
        _emit(_dump(A.to_json_dict(dec)), args.json)
    if args.svg:
        _emit(A.to_svg(dec), args.svg)
    print(f"merged_regions={dec.merged_region_count} activation_cells={dec.activation_cell_count} "
          f"upper_bound={upper}")
    return EXIT_FINDING if upper is not None and dec.merged_region_count > upper else EXIT_OK


def cmd_export(args) -> int:
    if bool(args.net) == bool(args.pwl):
        raise UsageError("give exactly one of --net or --pwl")
    if args.net:
        f = forward_symbolic(_load_net(args.net))
        points = f.breakpoints
        extra = {"left_slope": str(f.left_slope), "right_slope": str(f.right_slope),
                 "domain": None if f.domain is None else [str(v) for v in f.domain]}
    else:
        try:
            points = read_breakpoints_csv(_read(args.pwl).decode())
        except PwlError as exc:
            raise UsageError(f"{args.pwl}: {exc}")
        points = sorted(points)
        extra = {}
    if args.format == "json":
        text = _dump(dict(extra, breakpoints=[[str(x), str(y)] for x, y in points]))
    else:
        text = points_csv(points, args.format == "csv-exact")
    _emit(text, args.out)
    return EXIT_OK


def cmd_suite(args) -> int:
    try:
        text = _read(args.config).decode() if args.config else ""
        cfg = S.load_config(text)
    except (S.ConfigError, UnicodeDecodeError) as exc:
        raise UsageError(f"{args.config}: {exc}")
    if args.seed_given:
        cfg["seed"] = args.seed
    summary = S.run_suite(cfg)
    _emit(S.summary_json(summary), args.out)
    for c in summary["criteria"]:
        print(f"criterion {c['criterion']} ({c['name']}): {'PASS' if c['pass'] else 'FAIL'}",
              file=sys.stderr)
    return EXIT_OK if summary["all_pass"] else EXIT_FINDING


# -- parser ----------------------------------------------------------------------------


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intralink",
                                description="Exact piece counting for ReLU networks with intra-layer links.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="instantiate a catalog construction")
    c.add_argument("--kind", required=True, choices=C.KINDS)
    for name in ("k", "w", "w1", "w2", "m", "d"):
        c.add_argument(f"--{name}", type=int)
    c.add_argument("--widths", type=_int_list)
    c.add_argument("--out", help="write the network spec JSON here")
    c.add_argument("--json", action="store_true", help="print the report as JSON")
    c.set_defaults(func=cmd_construct)

    e = sub.add_parser("eval", help="evaluate a network exactly at points")
    e.add_argument("--net", required=True)
    e.add_argument("--x", required=True, action="append",
                   help="rational point, e.g. 7/3; comma-separated for 2 inputs")
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("analyze", help="piece and zero report of a network")
    a.add_argument("--net", required=True)
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bound", help="closed-form bounds for an architecture shape")
    b.add_argument("--widths", required=True, type=_int_list)
    b.add_argument("--mode", default="ff", help="ff, intra2, all, resnet or dense")
    b.add_argument("--input-dim", type=int, default=1)
    b.add_argument("--regions", action="store_true", help="region bound even for input_dim 1")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bound)

    f = sub.add_parser("fuzz", help="seeded property fuzzing")
    f.add_argument("--check", default="soundness",
                   choices=("soundness", "lemmas", "rewrite", "regions", "lift"))
    f.add_argument("--modes", type=lambda s: s.split(","), default=["ff", "intra2"])
    f.add_argument("--cases", type=int, default=100)
    f.add_argument("--max-width", type=int, default=6)
    f.add_argument("--max-depth", type=int, default=4)
    f.add_argument("--seed", type=int, default=default_seed)
    f.add_argument("--json", help="write the JSON report here ('-' for stdout)")
    f.set_defaults(func=cmd_fuzz)

    s = sub.add_parser("separation", help="depth-separation certificate")
    s.add_argument("--theorem", required=True, choices=V.THEOREMS)
    s.add_argument("--k", required=True, type=int)
    s.add_argument("--allow-long", action="store_true")
    s.add_argument("--json", help="write the JSON report here ('-' for stdout)")
    s.set_defaults(func=cmd_separation)

    r = sub.add_parser("regions", help="2-D linear-region census")
    r.add_argument("--net", required=True)
    r.add_argument("--box", required=True, type=lambda t: t.split(","),
                   help="xlo,xhi,ylo,yhi; write --box=-2,2,-2,2 when xlo is negative")
    r.add_argument("--json", help="write the cell list here")
    r.add_argument("--svg", help="write an SVG rendering here")
    r.set_defaults(func=cmd_regions)

    x = sub.add_parser("export", help="breakpoint export")
    x.add_argument("--net")
    x.add_argument("--pwl", help="exact breakpoint CSV")
    x.add_argument("--format", default="csv-exact", choices=("csv-exact", "csv-float", "json"))
    x.add_argument("--out", default="-")
    x.set_defaults(func=cmd_export)

    u = sub.add_parser("suite", help="run the acceptance battery")
    u.add_argument("--config", help="TOML key-value config")
    u.add_argument("--out", default="-", help="summary JSON destination")
    u.add_argument("--seed", type=int, default=default_seed)
    u.set_defaults(func=cmd_suite)
    return p


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(_default_seed())
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_USAGE
        args.seed_given = "--seed" in argv or os.environ.get(SEED_ENV) is not None
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
