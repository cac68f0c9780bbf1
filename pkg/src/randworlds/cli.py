"""Command-line front end.

Subcommands: eval (limiting degree of belief), count (exact world counts
at one domain size), maxent (unary fast path), check (property suites).

Exit codes for eval are a stable contract: 0 converged, 2 nonrobust,
3 undefined, 1 any error (including budget exhaustion).  RW_BUDGET in the
environment overrides the default world budget; flags beat the
environment.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .counting import (
    BudgetExceededError, DEFAULT_BUDGET, cond_prob, count_worlds,
)
from .lang import LangError, tolerance_indices
from .limits import (
    Schedule, Thresholds, default_schedule, degree_of_belief,
)
from .parser import parse_formula, parse_kb_file
from .translate import ToleranceVector, ground_kb
from .worlds import total_worlds


def _frac(text: str) -> Fraction:
    return Fraction(text)


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("RW_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


def _count_method(name: str) -> str:
    return {"auto": "auto", "exact": "naive", "unary": "unary"}[name]


def _stage_labels(schedule: Schedule) -> list[str]:
    out = []
    for tv in schedule.stages:
        taus = tv.as_dict()
        vals = set(taus.values())
        if len(vals) == 1:
            t = vals.pop()
            out.append(f"{t.numerator}/{t.denominator}")
        else:
            out.append(",".join(f"{i}:{t}" for i, t in sorted(taus.items())))
    return out


def _build_schedule(vocab, kb, query, args) -> Schedule:
    base = default_schedule(vocab, kb, query, max_n=args.n_max)
    sizes = base.domain_sizes
    if args.sizes:
        sizes = tuple(int(x) for x in args.sizes.split(","))
    elif args.n_max is not None or args.n_min is not None:
        lo = args.n_min if args.n_min is not None else sizes[0]
        hi = args.n_max if args.n_max is not None else sizes[-1]
        sizes = tuple(range(lo, hi + 1))
    stages = base.stages
    if args.stages:
        idx = (tolerance_indices(kb) | tolerance_indices(query)) or {1}
        stages = tuple(ToleranceVector.uniform(idx, Fraction(s))
                       for s in args.stages.split(","))
    return Schedule(sizes, stages)


def cmd_eval(args) -> int:
    vocab, kb = parse_kb_file(args.kb)
    query = parse_formula(args.query, vocab)

    if args.method == "maxent":
        from .maxent import maxent_degree
        val = maxent_degree(vocab, kb, query)
        if args.json:
            print(json.dumps({"query": args.query, "kb_file": args.kb,
                              "method": "maxent", "value": val},
                             sort_keys=True))
        else:
            print(f"{args.query}: {val:.6f} (maxent concentration)")
        return 0

    schedule = _build_schedule(vocab, kb, query, args)
    thresholds = Thresholds(Fraction(args.delta_n), Fraction(args.delta_eps))
    est = degree_of_belief(vocab, query, kb, schedule=schedule,
                           thresholds=thresholds, budget=_budget(args),
                           jobs=args.jobs, method=_count_method(args.method))
    labels = _stage_labels(schedule)
    if args.report_dir:
        from .report import write_report
        paths = write_report(est, Path(args.report_dir), labels, args.query)
        if not args.json:
            for p in paths:
                print(f"wrote {p}", file=sys.stderr)
    if args.json:
        print(est.to_json(args.query, args.kb))
    else:
        for cell in est.grid:
            v = (f"{cell.prob.value} = {float(cell.prob.value):.6f}"
                 if cell.prob.defined else "undefined")
            print(f"N={cell.N} tau={labels[cell.stage]}: {v}")
        if est.value is not None:
            print(f"estimate: {est.value} = {float(est.value):.6f} "
                  f"[{est.status}]")
        else:
            print(f"estimate: none [{est.status}]")
        for d in est.diagnostics:
            print(f"note: {d}")
    return est.exit_code()


def cmd_count(args) -> int:
    vocab, kb = parse_kb_file(args.kb)
    kb_t = ground_kb(kb, Fraction(args.stage))
    wc = count_worlds(vocab, args.n, kb_t, budget=_budget(args),
                      jobs=args.jobs, method=_count_method(args.method))
    obj = {"count": str(wc.count), "total": str(wc.total),
           "defined": wc.count > 0}
    print(json.dumps(obj, sort_keys=True))
    return 0


def cmd_maxent(args) -> int:
    from .maxent import atoms, constraints_from_kb, maxent_degree, maxent_point
    vocab, kb = parse_kb_file(args.kb)
    cs, _context = constraints_from_kb(vocab, kb)
    dist = maxent_point(cs)
    obj = {
        "atoms": [a.describe() for a in atoms(vocab)],
        "constraints": [c.describe() for c in cs.constraints],
        "point": list(dist.p),
        "entropy": dist.entropy,
        "active": list(dist.active),
        "kkt_residual": dist.kkt_residual,
    }
    if args.query:
        query = parse_formula(args.query, vocab)
        obj["query"] = args.query
        obj["query_answer"] = maxent_degree(vocab, kb, query)
    if args.json:
        print(json.dumps(obj, sort_keys=True))
    else:
        for a, p in zip(obj["atoms"], dist.p):
            print(f"p({a}) = {p:.6f}")
        print(f"entropy = {dist.entropy:.6f}  (kkt residual "
              f"{dist.kkt_residual:.2e})")
        if args.query:
            print(f"{args.query}: {obj['query_answer']:.6f}")
    return 0


def cmd_check(args) -> int:
    from .defaults import run_property_suite
    results = run_property_suite(args.suite, budget=_budget(args),
                                 jobs=args.jobs)
    if args.json:
        print(json.dumps([{"name": r.name, "passed": r.passed,
                           "detail": r.detail} for r in results],
                         sort_keys=True))
    else:
        for r in results:
            mark = "PASS" if r.passed else "FAIL"
            print(f"{mark} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="randworlds",
        description="degrees of belief by exact counting of random worlds")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for any sampled diagnostics (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--kb", required=True, help="knowledge base file")
        sp.add_argument("--budget", type=int, default=None,
                        help="world-count budget (overrides RW_BUDGET)")
        sp.add_argument("--jobs", type=int, default=1,
                        help="parallel counting processes")
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--method", default="auto",
                        choices=["auto", "exact", "unary", "maxent"])

    ev = sub.add_parser("eval", help="estimate a limiting degree of belief")
    common(ev)
    ev.add_argument("--query", required=True)
    ev.add_argument("--n-min", type=int, default=None)
    ev.add_argument("--n-max", type=int, default=None)
    ev.add_argument("--sizes", default=None,
                    help="comma-separated domain sizes (overrides n-min/max)")
    ev.add_argument("--stages", default=None,
                    help="comma-separated tolerance stages, e.g. 1/4,1/8")
    ev.add_argument("--delta-n", default="1/20",
                    help="within-stage stabilization threshold")
    ev.add_argument("--delta-eps", default="1/20",
                    help="cross-stage drift threshold")
    ev.add_argument("--report-dir", default=None,
                    help="write grid.csv and convergence.png here")
    ev.set_defaults(fn=cmd_eval)

    ct = sub.add_parser("count", help="exact world counts at one domain size")
    common(ct)
    ct.add_argument("--n", type=int, required=True)
    ct.add_argument("--stage", default="1/8",
                    help="tolerance applied to every index")
    ct.set_defaults(fn=cmd_count)

    mx = sub.add_parser("maxent", help="maximum-entropy fast path")
    mx.add_argument("--kb", required=True)
    mx.add_argument("--query", default=None)
    mx.add_argument("--json", action="store_true")
    mx.set_defaults(fn=cmd_maxent)

    ck = sub.add_parser("check", help="run a property suite")
    ck.add_argument("--suite", required=True, choices=["klm", "corpus"])
    ck.add_argument("--budget", type=int, default=None)
    ck.add_argument("--jobs", type=int, default=1)
    ck.add_argument("--json", action="store_true")
    ck.set_defaults(fn=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    random.seed(args.seed)
    try:
        return args.fn(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LangError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
