"""Command line front end.

    ifstopo attractor --preset cmts --depth 3 --out cells.txt
    ifstopo analyze   --preset sierpinski-carpet --depth 2
    ifstopo quotient  --depth 5 --iterations 2
    ifstopo render    --preset sierpinski-carpet --depth 2 --arc 1/18,1/18 17/18,17/18
    ifstopo report    --depth 3

Exit codes: 0 success, 2 invalid input, 3 resource limit, 4 refused because
the space lacks the needed property.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import attractor, quotient, topology
from .errors import InvalidInput, PropertyRefusal, ResourceLimit
from .geometry import parse_point
from .render import render_svg

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_REFUSED = 0, 2, 3, 4

REFUSAL = ("connected space: the self-similar collapse quotient "
           "construction is unavailable")


def _load_ifs(args) -> attractor.IFSystem:
    if args.ifs_file:
        try:
            text = Path(args.ifs_file).read_text()
        except OSError as exc:
            raise InvalidInput(f"cannot read {args.ifs_file}: {exc}") from None
        return attractor.loads_ifs(text)
    return attractor.preset(args.preset)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _flatten(value, prefix=""):
    if isinstance(value, dict):
        for k, v in value.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        if isinstance(value, list):
            value = " ".join(map(str, value))
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif value is None:
            value = "n/a"
        yield f"{prefix[:-1]}: {value}"


def _structured(data, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    return "\n".join(_flatten(data)) + "\n"


def cmd_attractor(args) -> int:
    ifs = _load_ifs(args)
    cells = attractor.iterate_attractor(ifs, args.depth, args.budget)
    if args.out:
        Path(args.out).write_text(attractor.dumps_cellset(cells))
    summary = attractor.format_summary(cells)
    for key, value in summary.items():
        print(f"{key}: {value}")
    diam = math.sqrt(attractor.max_cell_diameter(cells))
    print(f"max_cell_diameter ~ {diam:.6g}")
    print(f"lipschitz_sum ~ {float(attractor.lipschitz_sum(ifs)):.6g}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    ifs = _load_ifs(args)
    report = topology.analyze(ifs, args.depth, args.budget)
    text = report.to_json() if args.format == "json" else report.to_text()
    _emit(text, args.out)
    return EXIT_OK


def _refuse_unless_cantor(ifs: attractor.IFSystem, budget) -> None:
    if ifs == attractor.preset("cmts"):
        return
    cells = attractor.iterate_attractor(ifs, 2, budget)
    count, _ = topology.connected_components(topology.build_adjacency(cells))
    if count == 1:
        raise PropertyRefusal(f"{ifs.name}: {REFUSAL}")
    raise InvalidInput("the collapse quotient is implemented on the Cantor "
                       "middle-third code space only")


def cmd_quotient(args) -> int:
    ifs = _load_ifs(args)
    _refuse_unless_cantor(ifs, args.budget)
    y_prefix = quotient.parse_word(args.y_cylinder)
    q = quotient.parse_word(args.q_word) if args.q_word else None
    reports = quotient.iterate_quotients(args.iterations, args.depth, y_prefix, q)
    data = {"depth": args.depth, "iterations": args.iterations,
            "passed": all(r.passed for r in reports),
            "reports": [r.to_dict() for r in reports]}
    if args.out:
        Path(args.out).write_text(_structured(data, args.format))
    for r in reports:
        print(f"iteration {r.index} (depth {r.depth}): "
              f"{'pass' if r.passed else 'FAIL'}; classes={len(r.decomposition.classes)} "
              f"fibre={' '.join(quotient.format_word(w) for w in r.witness or ())} "
              f"contraction<={r.self_similarity.contraction_max} "
              f"covering={r.self_similarity.covering}")
    print("all checks passed" if data["passed"] else "some checks FAILED")
    return EXIT_OK if data["passed"] else 1


def _parse_arc(values):
    if not values:
        return None
    if len(values) != 2:
        raise InvalidInput("--arc takes two points: P Q")
    return [parse_point(v) for v in values]


def cmd_render(args) -> int:
    ifs = _load_ifs(args)
    cells = attractor.iterate_attractor(ifs, args.depth, args.budget)
    line = None
    endpoints = _parse_arc(args.arc)
    if endpoints:
        line = topology.find_arc(cells, *endpoints)
        if line is None:
            print("no arc: endpoints lie in different components", file=sys.stderr)
    _emit(render_svg(cells, line), args.out)
    return EXIT_OK


def _cell(x):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def cmd_report(args) -> int:
    rows = []
    for name in args.presets:
        r = topology.analyze(attractor.preset(name), args.depth, args.budget)
        rows.append(r.to_dict())
    data = {"depth": args.depth, "spaces": rows}
    if args.format == "json" and not args.out:
        _emit(_structured(data, "json"), None)
        return EXIT_OK
    if args.out:
        _emit(_structured(data, args.format), args.out)
    header = ("space", "cells", "comps", "min_gap^2", "perfect", "i/ii/iii",
              "windows", "0-dim evidence")
    print(" | ".join(header))
    for d in rows:
        conds = "/".join("T" if d[k] else "F"
                         for k in ("condition_i", "condition_ii", "condition_iii"))
        print(" | ".join(_cell(x) for x in (
            d["ifs"], d["cells"], d["components"], d["min_gap_squared"],
            d["perfect_proxy"], conds, d["windows"], d["zero_dim_evidence"]["value"])))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifstopo", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, depth=2):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--preset", default="cmts", choices=sorted(attractor.PRESETS))
        src.add_argument("--ifs-file", help="IFS definition in structured text")
        p.add_argument("--depth", type=int, default=depth)
        p.add_argument("--budget", type=int, default=None,
                       help=f"cell budget (default ${attractor.BUDGET_ENV} or "
                            f"{attractor.DEFAULT_BUDGET})")
        p.add_argument("--out")
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("attractor", help="build X_k and export its cells")
    common(p)
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("analyze", help="finite-resolution topology report")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("quotient", help="collapse quotient of the Cantor set")
    common(p, depth=5)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--y-cylinder", default="1", help="prefix word of the cylinder Y")
    p.add_argument("--q-word", help="word of the point q in Y (default 11...1)")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("render", help="SVG figure of X_k")
    common(p)
    p.add_argument("--arc", nargs="*", metavar="POINT",
                   help="two points 'x,y' to join by an arc")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="side-by-side property table")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--presets", nargs="+", default=["cmts", "sierpinski-carpet"],
                   choices=sorted(attractor.PRESETS))
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "depth", 0) < 0:
            raise InvalidInput("depth must be non-negative")
        return args.func(args)
    except PropertyRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
