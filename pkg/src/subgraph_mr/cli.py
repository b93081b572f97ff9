"""Command-line entry point: ``subgraph-mr <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from math import comb

from . import __version__
from .cq import automorphisms, generate_cqs
from .cycles import cycle_cqs
from .generators import gnm
from .graph import read_edge_list
from .instances import canonical_instance, write_instances
from .mapreduce import SCHEMES, run_round
from .planner import (
    StructuralError,
    bidirectional_edges,
    convertibility_check,
    cost_expression,
    optimize_shares,
    regular_mixed_shares,
    symbolic_plan,
)
from .samples import parse_sample
from .serial import (
    OracleSizeError,
    brute_force_oracle,
    count_properly_ordered_2paths,
    decompose_sample,
    enumerate_general,
)

log = logging.getLogger("subgraph_mr")

EXIT_MISMATCH = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _sample(args):
    try:
        return parse_sample(args.sample)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None


def _graph(args):
    if args.graph is None:
        raise UsageError("--graph is required")
    try:
        return read_edge_list(args.graph)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read graph: {exc}") from None


def _is_cycle_spec(spec: str) -> bool:
    return spec.startswith("cycle:")


def _cqs_for(s, spec: str, general: bool = False):
    """Run-sequence CQs for ``cycle:p`` unless the general method is asked for."""
    if not general and _is_cycle_spec(spec):
        return cycle_cqs(s.p)
    return generate_cqs(s)


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fmt(x, digits=6) -> str:
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


# ---------------------------------------------------------------- commands


def cmd_gen_cq(args) -> int:
    s = _sample(args)
    general = generate_cqs(s)
    doc = {"sample": args.sample, "general": general.to_json()}
    lines = []
    if _is_cycle_spec(args.sample):
        runs = cycle_cqs(s.p)
        doc["run_sequence"] = runs.to_json()
        lines.append(f"{len(runs)} CQs (run-sequence method)")
        for i, (q, pv) in enumerate(zip(runs, runs.provenance), 1):
            lines.append(f"{i}. [{pv[0]}] {q.render()}")
        lines.append(f"{len(general)} CQs (general method)")
    else:
        lines.append(f"{len(general)} CQs")
    lines.append(general.render())
    if args.json:
        _emit_json(doc)
    else:
        print("\n".join(lines))
    if args.out:
        _emit_json(doc, args.out)
    return 0


def cmd_plan(args) -> int:
    s = _sample(args)
    if args.k is None:
        raise UsageError("--k is required")
    cqs = _cqs_for(s, args.sample, args.general)
    if args.cq is not None:
        if not 1 <= args.cq <= len(cqs):
            raise UsageError(f"--cq must be in 1..{len(cqs)}")
        expr = cost_expression(cqs[args.cq - 1], "single")
        scope = f"CQ {args.cq}"
    else:
        expr = cost_expression(list(cqs), "variable-oriented")
        scope = f"all {len(cqs)} CQs, variable-oriented"
    plan = optimize_shares(expr, args.k)
    closed = None
    if args.cq is None and s.is_regular() and len(cqs) > 1:
        try:
            closed = regular_mixed_shares(s, bidirectional_edges(cqs), args.k)
        except StructuralError:
            closed = None
    if closed is not None and closed.cost_per_edge <= plan.cost_per_edge * (1 + 1e-9):
        # same optimum; the closed form picks the 2:1 point on a flat direction
        plan = closed
    rounded = plan.rounded()
    d = decompose_sample(s)
    alpha, beta = d.exponents(s.p)
    conv = convertibility_check(alpha, beta, s.p)
    doc = {
        "sample": args.sample,
        "scope": scope,
        "expression": expr.to_json(),
        "plan": plan.to_json(),
        "rounded": rounded.to_json(),
        "decomposition": d.describe(s.names),
        "convertibility": conv.to_json(),
    }
    if args.m is not None:
        sp = symbolic_plan(plan, args.m)
        doc["symbolic"] = {
            "m": args.m,
            "shares": sp.shares,
            "reducers": sp.k,
            "per_edge": str(sp.per_edge),
            "total_communication": str(sp.total_communication),
            "per_reducer_load": str(sp.per_reducer_load),
        }
    if args.json:
        _emit_json(doc)
    else:
        print(f"sample {args.sample} ({scope}), k = {_fmt(float(args.k))}")
        print(f"cost {expr.render()}")
        if expr.dominated:
            print("dominated (share 1): " + ", ".join(s.names[v] for v in sorted(expr.dominated)))
        print("shares   " + "  ".join(f"{n}={_fmt(x)}" for n, x in plan.as_dict().items()))
        print(f"replication per edge {_fmt(plan.cost_per_edge)}   reducers {_fmt(plan.product())}")
        print("rounded  " + "  ".join(f"{n}={int(x)}" for n, x in rounded.as_dict().items())
              + f"   replication {_fmt(rounded.cost_per_edge)}   reducers {int(rounded.product())}")
        if args.m is not None:
            sym = doc["symbolic"]
            print(f"m = {args.m}: total communication {sym['total_communication']}, "
                  f"per-reducer load {sym['per_reducer_load']}")
        print(f"decomposition {d.describe(s.names)} -> ({alpha}, {beta})-algorithm, "
              f"{'convertible' if conv.convertible else 'not convertible'}")
    if args.out:
        _emit_json(doc, args.out)
    return 0


def _run_once(g, s, args):
    cqs = _cqs_for(s, args.sample, args.general)
    shares = None
    if args.scheme == "variable-oriented":
        if args.shares:
            shares = [int(x) for x in args.shares.split(",")]
        elif args.k is not None:
            shares = optimize_shares(cost_expression(list(cqs), "variable-oriented"), args.k).rounded().shares
        else:
            raise UsageError("variable-oriented needs --k or --shares")
    elif args.b is None:
        raise UsageError(f"{args.scheme} needs --b")
    return cqs, run_round(g, args.scheme, cqs, b=args.b, shares=shares, seed=args.seed, threads=args.threads)


def cmd_run(args) -> int:
    s = _sample(args)
    g = _graph(args)
    if args.scheme is None:
        raise UsageError("--scheme is required")
    try:
        cqs, (instances, report) = _run_once(g, s, args)
    except (StructuralError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    names = s.names
    status = 0
    doc = {"report": report.to_json()}
    if args.verify:
        try:
            want = set(brute_force_oracle(g, s))
        except OracleSizeError as exc:
            print(f"verify refused: {exc}", file=sys.stderr)
            return EXIT_USAGE
        auts = automorphisms(s)
        got = [canonical_instance(t, auts) for _, t in instances]
        dupes = len(got) - len(set(got))
        ok = dupes == 0 and set(got) == want
        doc["verify"] = {"oracle": len(want), "found": len(got), "duplicates": dupes, "ok": ok}
        if not ok:
            status = EXIT_MISMATCH
    if args.out:
        write_instances(args.out, ((qi + 1, t) for qi, t in instances), names)
    if args.json:
        _emit_json(doc, args.json if args.json != "-" else None)
    if args.json != "-":
        r = report
        print(f"scheme {r.scheme}  seed {r.seed}  params {json.dumps(r.params, sort_keys=True)}")
        print(f"edges {r.edge_count}  pairs {r.key_value_pairs_emitted}  raw {r.raw_pairs}  "
              f"per-edge {r.per_edge_replication:.6g}  predicted {r.predicted_pairs}")
        print(f"reducers used {r.distinct_reducers_used}  max load {r.max_reducer_edges}  "
              f"work proxy {r.reducer_work_proxy:.6g}")
        print(f"instances {r.instances_found}")
        if "verify" in doc:
            v = doc["verify"]
            print(f"verify: oracle {v['oracle']}  found {v['found']}  duplicates {v['duplicates']}  "
                  f"{'OK' if v['ok'] else 'MISMATCH'}")
    return status


def compare_buckets(k: int) -> dict[str, int]:
    """Largest bucket count per triangle scheme whose reducer count fits ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    b_part = 3
    while comb(b_part + 1, 3) <= k:
        b_part += 1
    b_multi = 1
    while (b_multi + 1) ** 3 <= k:
        b_multi += 1
    b_bucket = 1
    while comb(b_bucket + 3, 3) <= k:
        b_bucket += 1
    return {"partition": b_part, "multiway": b_multi, "bucket-ordered": b_bucket}


def asymptotic_replication(scheme: str, k: float) -> float:
    """Per-edge communication for ``k`` reducers, to leading order."""
    if scheme == "partition":
        return 1.5 * (6 * k) ** (1 / 3)
    if scheme == "multiway":
        return 3 * k ** (1 / 3)
    return (6 * k) ** (1 / 3)


def exact_replication(scheme: str, b: int) -> float:
    if scheme == "partition":
        return 1.5 * (b - 1) * (b - 2) / b
    if scheme == "multiway":
        return 3 * b - 2
    return b


def cmd_compare(args) -> int:
    s = parse_sample("triangle")
    if args.graph:
        g = _graph(args)
    else:
        g = gnm(args.n, args.m, args.seed)
    k = args.k if args.k is not None else 220
    bs = compare_buckets(int(k))
    cqs = generate_cqs(s)
    rows = []
    found = set()
    for scheme in ("partition", "multiway", "bucket-ordered"):
        t0 = time.perf_counter()
        inst, rep = run_round(g, scheme, cqs, b=bs[scheme], seed=args.seed,
                              evaluate=not args.no_eval, threads=args.threads)
        rows.append({
            "scheme": scheme,
            "b": bs[scheme],
            "reducers": rep.distinct_reducers_used,
            "per_edge": rep.per_edge_replication,
            "exact": exact_replication(scheme, bs[scheme]),
            "asymptotic": asymptotic_replication(scheme, k),
            "instances": rep.instances_found if not args.no_eval else None,
            "seconds": round(time.perf_counter() - t0, 3),
        })
        found.add(rep.instances_found)
    doc = {"k": k, "m": g.edge_count, "n": g.node_count, "seed": args.seed, "rows": rows}
    if args.json:
        _emit_json(doc)
    else:
        print(f"triangle comparison: m={g.edge_count} n={g.node_count} k={k} seed={args.seed}")
        hdr = f"{'scheme':<15}{'b':>4}{'reducers':>10}{'measured':>12}{'exact':>10}{'asymptotic':>12}{'triangles':>11}"
        print(hdr)
        for r in rows:
            tri = "-" if r["instances"] is None else str(r["instances"])
            print(f"{r['scheme']:<15}{r['b']:>4}{r['reducers']:>10}{r['per_edge']:>11.4f}m"
                  f"{r['exact']:>9.4g}m{r['asymptotic']:>11.4g}m{tri:>11}")
        print("asymptotic: partition 3m(6k)^(1/3)/2, multiway 3m k^(1/3), bucket-ordered m(6k)^(1/3)")
    if args.out:
        _emit_json(doc, args.out)
    if not args.no_eval and len(found) != 1:
        print("schemes disagree on the triangle count", file=sys.stderr)
        return EXIT_MISMATCH
    return 0


def cmd_oracle(args) -> int:
    s = _sample(args)
    g = _graph(args)
    try:
        insts = brute_force_oracle(g, s)
    except OracleSizeError as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        write_instances(args.out, ((0, t) for t in insts), s.names)
    if args.json:
        _emit_json({"sample": args.sample, "count": len(insts), "instances": [list(t) for t in insts]})
    else:
        print(f"{len(insts)} instances")
    return 0


def cmd_bench(args) -> int:
    s = _sample(args)
    g = _graph(args) if args.graph else gnm(args.n, args.m, args.seed)
    rows = []

    def timed(label, fn):
        t0 = time.perf_counter()
        out = fn()
        rows.append((label, len(out), time.perf_counter() - t0))

    timed("enumerate_general", lambda: enumerate_general(g, s))
    if args.b is not None:
        cqs = _cqs_for(s, args.sample, args.general)
        for scheme in ("bucket-ordered",) + (("partition",) if args.b >= max(3, s.p) else ()):
            timed(f"{scheme} b={args.b}",
                  lambda scheme=scheme: run_round(g, scheme, cqs, b=args.b, seed=args.seed, threads=args.threads)[0])
    m = g.edge_count
    two = count_properly_ordered_2paths(g)
    print(f"graph n={g.node_count} m={m} max degree {g.max_degree()}  sample {args.sample}")
    print(f"properly ordered 2-paths {two} = {two / max(m, 1) ** 1.5:.4f} m^1.5")
    for label, count, secs in rows:
        print(f"{label:<28}{count:>10} instances {secs:>9.3f}s")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subgraph-mr",
        description="Enumerate sample-graph instances with single-round map-reduce plans.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=False, sample=True):
        if sample:
            p.add_argument("--sample", required=True,
                           help="triangle, square, lollipop, edge, cycle:p, path:p, star:p, clique:p or a file")
        if graph:
            p.add_argument("--graph", help="edge-list file: one 'u v' pair per line")
        p.add_argument("--seed", type=int, default=0, help="hash seed (default 0)")
        p.add_argument("--out", help="output file")
        p.add_argument("--general", action="store_true",
                       help="use the general CQ method even for cycles")

    p = sub.add_parser("gen-cq", help="list the CQs for a sample graph")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen_cq)

    p = sub.add_parser("plan", help="optimize shares for k reducers")
    common(p)
    p.add_argument("--k", type=float, required=True, help="reducer budget")
    p.add_argument("--cq", type=int, help="plan a single CQ (1-based) instead of the whole set")
    p.add_argument("--m", type=int, help="edge count for exact totals")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="simulate one map-reduce round")
    common(p, graph=True)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--b", type=int, help="bucket count")
    p.add_argument("--k", type=float, help="reducer budget (variable-oriented)")
    p.add_argument("--shares", help="comma-separated integer shares (variable-oriented)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="compare with the brute-force oracle")
    p.add_argument("--json", nargs="?", const="-", help="write the JSON report (to a file, or stdout with no value)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="triangle schemes side by side")
    common(p, graph=True, sample=False)
    p.add_argument("--k", type=float, help="reducer budget (default 220)")
    p.add_argument("--n", type=int, default=20000, help="random graph nodes when --graph is absent")
    p.add_argument("--m", type=int, default=100000, help="random graph edges when --graph is absent")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-eval", action="store_true", help="count communication only")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="brute-force instances of a small graph")
    common(p, graph=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time the serial and map-reduce enumerators")
    common(p, graph=True)
    p.add_argument("--b", type=int)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--m", type=int, default=10000)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
