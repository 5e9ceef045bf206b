"""Command line entry point ``netcover``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .cuts import generate_nogood
from .delimit import build_delimitation
from .formulations import FORMS, Cover, FormulationKind, formulate
from .harness import (
    RADII,
    gen_random,
    metrics,
    parse_radius,
    performance_profile,
    records_csv,
    rows_csv,
    run_bench,
    solve_instance,
    summarize,
)
from .milp import write_lp
from .network import Point, all_pairs_distances, read_instance, split_edges
from .verify import check_cover, oracle_optimum, uncovered_edges


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _prepare(args):
    net = read_instance(args.instance)
    radius = parse_radius(net, args.radius)
    split = split_edges(net, radius)
    return net, radius, split, all_pairs_distances(split.network)


def _kind(args) -> FormulationKind:
    return FormulationKind(args.form, aggregate=args.aggregate, tighten=args.tighten)


def cover_to_json(net, cover: Cover) -> dict:
    return {
        "points": [
            {"edge": [net.edges[p.edge].a, net.edges[p.edge].b], "x": p.x} for p in cover.points
        ]
    }


def cover_from_json(net, data: dict) -> Cover:
    points = []
    for item in data["points"]:
        u, w = item["edge"]
        e = net.edge_id(u, w)
        x = float(item["x"])
        if u > w:  # coordinate given from the larger endpoint
            x = net.length(e) - x
        points.append(Point(e, x))
    return Cover(tuple(points))


def cmd_delimit(args) -> int:
    net, radius, split, dm = _prepare(args)
    snet = split.network
    delim = build_delimitation(snet, dm, radius)
    label = snet.label
    out = {
        "radius": radius,
        "n_sd": split.n_sd,
        "edges": snet.m,
        "complete": {label(e): sorted(label(f) for f in delim.complete[e]) for e in range(snet.m)},
        "partial": {str(v): sorted(label(f) for f in delim.partial[v]) for v in snet.vertices},
        "pairs": {str(v): [[label(f), t] for f, t in delim.pairs[v]] for v in snet.vertices},
        "pair_count": delim.pair_count(),
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_build(args) -> int:
    net, radius, split, dm = _prepare(args)
    form = formulate(split.network, radius, _kind(args), dm)
    _write(write_lp(form.model), args.output)
    return 0


def cmd_cuts(args) -> int:
    net, radius, split, dm = _prepare(args)
    snet = split.network
    delim = build_delimitation(snet, dm, radius)
    patterns = generate_nogood(snet, dm, delim, radius, args.max_rank)
    out = {"count": len(patterns)}
    if args.json:
        out["cuts"] = [
            {"edges": [snet.label(e) for e in p.edges], "triples": [[v, snet.label(f), t] for v, f, t in p.triples]}
            for p in patterns
        ]
    print(json.dumps(out, indent=2 if args.json else None))
    return 0


def cmd_solve(args) -> int:
    net = read_instance(args.instance)
    radius = parse_radius(net, args.radius)
    out = solve_instance(net, radius, _kind(args), args.time_limit, args.method)
    res = out.result
    sigma, vr = metrics(res, out.split.n_sd)
    record = {
        "form": out.formulation.kind.tag,
        "radius": radius,
        "status": res.status,
        "objective": res.primal if math.isfinite(res.primal) else None,
        "primal": res.primal if math.isfinite(res.primal) else None,
        "dual": res.dual if math.isfinite(res.dual) else None,
        "sigma": sigma,
        "vr": vr,
        "nodes": res.nodes,
        "time": out.total_time,
        "n_sd": out.split.n_sd,
        "cuts": len(out.formulation.cuts),
    }
    if out.cover is not None:
        record["cover"] = cover_to_json(net, out.cover)["points"]
    print(json.dumps(record, indent=2))
    if args.export:
        Path(args.export).write_text(write_lp(out.formulation.model))
    if args.cover_out and out.cover is not None:
        Path(args.cover_out).write_text(json.dumps(cover_to_json(net, out.cover), indent=2) + "\n")
    return 0


def cmd_verify(args) -> int:
    net = read_instance(args.instance)
    radius = parse_radius(net, args.radius)
    cover = cover_from_json(net, json.loads(Path(args.cover).read_text()))
    dm = all_pairs_distances(net)
    bad = uncovered_edges(net, dm, radius, cover)
    ok = check_cover(net, dm, radius, cover)
    print(json.dumps({"valid": ok, "points": len(cover), "uncovered": [net.label(e) for e in bad]}))
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    net, radius, split, dm = _prepare(args)
    snet = split.network
    delim = build_delimitation(snet, dm, radius)
    print(json.dumps({"radius": radius, "optimum": oracle_optimum(snet, dm, delim, radius, args.kmax)}))
    return 0


def cmd_bench(args) -> int:
    paths = sorted(Path(args.dir).glob(args.pattern))
    if not paths:
        print(f"no instances matching {args.pattern} in {args.dir}", file=sys.stderr)
        return 2
    instances = [(p.stem, read_instance(p)) for p in paths]
    forms = [f.strip() for f in args.forms.split(",") if f.strip()]
    radii = [r.strip() for r in args.radii.split(",") if r.strip()]
    for f in forms:
        FormulationKind(f)
    for r in radii:
        if r not in RADII:
            raise SystemExit(f"unknown radius kind {r!r}")
    records = run_bench(
        instances, forms, radii, args.time_limit, timing=not args.no_timing,
        method=args.method, tighten=args.tighten, aggregate=args.aggregate,
    )
    _write(records_csv(records), args.output)
    if args.summary:
        Path(args.summary).write_text(rows_csv(summarize(records)))
    if args.profile:
        Path(args.profile).write_text(rows_csv(performance_profile(records)))
    return 0


def cmd_gen(args) -> int:
    net = gen_random(args.n, args.p, args.seed)
    _write(f"# G({args.n}, {args.p}) seed {args.seed}\n" + net.to_text(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcover", description="Continuous set covering on networks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_args(p, form=False):
        p.add_argument("instance")
        p.add_argument("--radius", required=True, help="a positive number, 'small' or 'large'")
        if form:
            p.add_argument("--form", choices=sorted(FORMS), default="efp")
            p.add_argument("--aggregate", action="store_true", help="aggregated disjunctive rows")
            p.add_argument("--tighten", action="store_true", help="tightened big-M constants")

    p = sub.add_parser("delimit", help="print delimitation sets")
    instance_args(p)
    p.set_defaults(func=cmd_delimit)

    p = sub.add_parser("build", help="write a formulation as an LP file")
    instance_args(p, form=True)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("cuts", help="generate no-good inequalities")
    instance_args(p)
    p.add_argument("--max-rank", type=int, choices=(1, 2), default=1)
    p.add_argument("--json", action="store_true", help="also list the cuts")
    p.set_defaults(func=cmd_cuts)

    p = sub.add_parser("solve", help="solve and print a JSON record")
    instance_args(p, form=True)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--method", choices=("highs", "simplex"), default="highs")
    p.add_argument("--export", metavar="LP", help="also write the model as an LP file")
    p.add_argument("--cover-out", metavar="JSON", help="write the cover found")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a cover given as JSON")
    instance_args(p)
    p.add_argument("--cover", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    instance_args(p)
    p.add_argument("--kmax", type=int, default=6)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run a benchmark batch")
    p.add_argument("--dir", required=True)
    p.add_argument("--pattern", default="*.txt")
    p.add_argument("--forms", default="efp,efpd,efpv1")
    p.add_argument("--radii", default="small,large")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--method", choices=("highs", "simplex"), default="highs")
    p.add_argument("--aggregate", action="store_true")
    p.add_argument("--tighten", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="write 0 as time for reproducible output")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--summary", help="write SGM summary CSV")
    p.add_argument("--profile", help="write performance-profile CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
