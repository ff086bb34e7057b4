"""Command-line front end.

Exit codes: 0 success or certified optimum, 2 incumbent only (budget ran
out), 3 verification failure or no feasible code, 4 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .bounds import all_bounds, check_fibers_against_bound
from .constructions import concat_double, concat_general
from .cover import DEFAULT_EDGE_CAP, enumerate_maximal_edges, solve
from .decodability import verify_codebook
from .linear import decodable_indices, is_vp_linear, linear_min_T, linear_to_codebook, parse_matrix
from .model import (
    MAX_EXACT_VERTICES,
    CapacityError,
    CodebookStructureError,
    InputError,
    VPCodebook,
    check_alphabet,
    load_instance,
    rate_of,
)
from .pliable import DEFAULT_CHOICE_CAP, format_choice, parse_choice, pliable_for_choice, pliable_min_t

EXIT_OK, EXIT_INCUMBENT, EXIT_FAILED, EXIT_INPUT = 0, 2, 3, 4

SWEEP_COLUMNS = [
    "k", "t_vp", "alpha_k", "certified_vp", "t_pliable", "beta_k", "certified_pliable",
    "t_lower", "fiber_cap", "max_fiber", "status",
]

log = logging.getLogger("vpindex")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt_rate(x: float) -> str:
    return f"{x:.4f}"


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("VP_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise InputError(f"VP_THREADS must be an integer, got {env!r}")


def _instance(args):
    inst, k = load_instance(args.instance)
    if getattr(args, "k", None) is not None:
        k = check_alphabet(args.k)
    return inst, k


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bool(x: bool) -> str:
    return "true" if x else "false"


def cmd_solve(args) -> int:
    inst, k = _instance(args)
    res = solve(inst, k, edge_cap=args.edge_cap, time_limit=args.time_limit,
                node_limit=args.node_limit, workers=_threads(args))
    summary = f"t={res.t} rate={_fmt_rate(res.rate)} certified={_bool(res.certified)} edges={res.edge_count} max_fiber={res.max_edge_size}"
    if args.out:
        _emit(res.codebook.dumps(), args.out)
        print(summary)
    else:
        print(summary, file=sys.stderr)
        sys.stdout.write(res.codebook.dumps())
    return EXIT_OK if res.certified else EXIT_INCUMBENT


def sweep_row(inst, k, edge_cap, time_limit) -> dict:
    bounds = [b for b in all_bounds(inst, k) if b.applicable]
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(k=k, t_lower=max(b.t_lower_ceil for b in bounds), fiber_cap=min(b.fiber_cap for b in bounds))
    if k ** inst.m > MAX_EXACT_VERTICES:
        row["status"] = "bounds-only"
        return row
    errors = []
    try:
        vp = solve(inst, k, edge_cap=edge_cap, time_limit=time_limit)
        row.update(t_vp=vp.t, alpha_k=_fmt_rate(vp.rate), certified_vp=_bool(vp.certified), max_fiber=vp.max_edge_size)
    except (CapacityError, InputError) as exc:
        errors.append(f"vp: {exc}")
    try:
        pl = pliable_min_t(inst, k, edge_cap=edge_cap, time_limit=time_limit)
        row.update(t_pliable=pl.t, beta_k=_fmt_rate(pl.rate), certified_pliable=_bool(pl.certified))
    except (CapacityError, InputError) as exc:
        errors.append(f"pliable: {exc}")
    row["status"] = "; ".join(errors) if errors else "ok"
    return row


def _sweep_worker(payload):
    inst, k, edge_cap, time_limit = payload
    start = time.perf_counter()
    row = sweep_row(inst, k, edge_cap, time_limit)
    return row, time.perf_counter() - start


def cmd_sweep(args) -> int:
    inst, k0 = load_instance(args.instance)
    kmin = args.k if args.k is not None else k0
    kmax = args.kmax if args.kmax is not None else kmin
    if kmax >= kmin:
        check_alphabet(kmin)
    payloads = [(inst, k, args.edge_cap, args.time_limit) for k in range(kmin, kmax + 1)]
    workers = _threads(args)
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    else:
        results = [_sweep_worker(p) for p in payloads]
    rows = []
    for row, elapsed in results:
        if args.timing:
            row["wall_time"] = f"{elapsed:.3f}"
        rows.append(row)
        log.info("k=%s done in %.2fs", row["k"], elapsed)
    columns = SWEEP_COLUMNS + (["wall_time"] if args.timing else [])
    if args.format == "json":
        text = json.dumps({"instance": inst.to_json(), "rows": rows}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    _emit(text, args.out)
    if any(r["certified_vp"] == "false" or r["certified_pliable"] == "false" for r in rows):
        return EXIT_INCUMBENT
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, k = _instance(args)
    with open(args.codebook) as fh:
        text = fh.read()
    try:
        cb = VPCodebook.loads(text, inst)
        result = verify_codebook(cb, inst, k)
    except CodebookStructureError as exc:
        print(json.dumps({"ok": False, "reason": f"structure: {exc}"}))
        return EXIT_INPUT
    if result:
        print(json.dumps({"ok": True, "t": cb.t, "rate": round(cb.rate, 4)}))
        return EXIT_OK
    print(json.dumps({"ok": False, **result.failure}))
    return EXIT_FAILED


def cmd_bounds(args) -> int:
    inst, k = _instance(args)
    reports = all_bounds(inst, k)
    if args.format == "json":
        _emit(json.dumps([r.row() for r in reports], indent=1) + "\n", args.out)
        return EXIT_OK
    lines = [f"{'bound':<10} {'applicable':<10} {'fiber_cap':>9} {'t_lower':>9} {'ceiled':>6}"]
    for r in reports:
        if r.applicable:
            lines.append(f"{r.bound_name:<10} {'yes':<10} {r.fiber_cap:>9} {str(r.t_lower):>9} {r.t_lower_ceil:>6}")
        else:
            lines.append(f"{r.bound_name:<10} {'no':<10} {'-':>9} {'-':>9} {'-':>6}")
    if args.check_edges:
        hg = enumerate_maximal_edges(inst, k, edge_cap=args.edge_cap)
        if not hg.complete:
            raise CapacityError("edge cap exceeded; cannot check every maximal fiber")
        largest = hg.max_edge_size
        lines.append(f"largest maximal fiber: {largest} over {len(hg.edges)} edges")
        for r in reports:
            if r.applicable:
                ok = check_fibers_against_bound(hg, r)
                lines.append(f"{r.bound_name} cap respected: {'yes' if ok else 'NO'}")
                if not ok:
                    _emit("\n".join(lines) + "\n", args.out)
                    return EXIT_FAILED
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_linear_check(args) -> int:
    inst, _ = load_instance(args.instance)
    enc = parse_matrix(args.matrix)
    enc.check(args.q)
    ok, choice = is_vp_linear(enc, inst, args.q)
    for h in inst.receivers:
        idx = sorted(i + 1 for i in decodable_indices(enc, h, args.q))
        print(f"receiver {sorted(j + 1 for j in h)}: decodable {idx}")
    print(f"vp_linear={_bool(ok)}")
    if ok:
        print(f"choice {format_choice(choice, inst)}")
        if args.out:
            _emit(linear_to_codebook(enc, inst, args.q).dumps(), args.out)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_linear_search(args) -> int:
    inst, _ = load_instance(args.instance)
    res = linear_min_T(inst, args.q, args.tmax)
    if res is None:
        print(f"no decodable linear encoder over GF({args.q}) with T <= {args.tmax or inst.m}")
        return EXIT_FAILED
    matrix = ";".join(",".join(map(str, row)) for row in res.encoder.matrix)
    print(f"T={res.T} rate={_fmt_rate(float(res.T))} matrix={matrix} choice={format_choice(res.choice, inst)}")
    return EXIT_OK


def cmd_concat(args) -> int:
    inst = load_instance(args.instance)[0] if args.instance else None
    with open(args.codebook) as fh:
        cb = VPCodebook.loads(fh.read(), inst)
    base = verify_codebook(cb)
    if not base:
        print(json.dumps({"ok": False, "input": base.failure}))
        return EXIT_FAILED
    m, k = cb.m, cb.k
    if args.mode == "double":
        out = concat_double(cb)
        p, f = 1, 2
    else:
        out = concat_general(cb, p=args.p, field_size=args.field)
        p, f = args.p, out.k // k
    raw = cb.t * f ** (m - p)
    alpha = rate_of(cb.t, k)
    bound = (alpha * math.log(k) + (m - p) * math.log(f)) / (math.log(k) + math.log(f))
    ok = bool(verify_codebook(out))
    _emit(out.dumps(), args.out)
    print(json.dumps({
        "ok": ok, "k": out.k, "field_size": f, "field_size_is_upper_bound": args.mode == "general" and args.field is None,
        "t_raw": raw, "t": out.t, "rate": round(out.rate, 4), "rate_bound": round(bound, 4),
    }))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_pliable(args) -> int:
    inst, k = _instance(args)
    if args.choice:
        res = pliable_for_choice(inst, k, parse_choice(args.choice, inst), args.edge_cap, args.time_limit)
    else:
        res = pliable_min_t(inst, k, choice_cap=args.choice_cap, edge_cap=args.edge_cap,
                            time_limit=args.time_limit, workers=_threads(args))
    summary = f"t={res.t} rate={_fmt_rate(res.rate)} certified={_bool(res.certified)} choice={format_choice(res.choice, inst)}"
    if args.out:
        _emit(res.codebook.dumps(), args.out)
    print(summary)
    return EXIT_OK if res.certified else EXIT_INCUMBENT


def cmd_enumerate_edges(args) -> int:
    inst, k = _instance(args)
    hg = enumerate_maximal_edges(inst, k, edge_cap=args.edge_cap)
    if not hg.complete:
        raise CapacityError(f"more than {args.edge_cap} maximal edges")
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["edge", "size", "realisations"])
        for i, e in enumerate(hg.edges):
            writer.writerow([i, e.bit_count(), " ".join("".join(map(str, r)) for r in hg.members(e))])
        text = buf.getvalue()
    else:
        text = json.dumps({
            "m": inst.m, "k": k, "count": len(hg.edges), "max_size": hg.max_edge_size,
            "edges": [[list(r) for r in hg.members(e)] for e in hg.edges],
        }) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vpindex", description="Very-pliable index coding solver and toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, k=True, search=True):
        p.add_argument("--instance", required=True)
        if k:
            p.add_argument("--k", type=int, help="alphabet size (overrides the instance file)")
        if search:
            p.add_argument("--edge-cap", type=int, default=DEFAULT_EDGE_CAP)
            p.add_argument("--time-limit", type=float)
            p.add_argument("--threads", type=int, help="worker processes (default $VP_THREADS or 1)")
        p.add_argument("--out")

    p = sub.add_parser("solve", help="certified optimal VP code")
    common(p)
    p.add_argument("--node-limit", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="alpha/beta table over a range of k")
    common(p)
    p.add_argument("--kmax", type=int)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--timing", action="store_true", help="add a wall_time column (not reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check a codebook against an instance")
    common(p, search=False)
    p.add_argument("--codebook", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="fiber caps and lower bounds on t")
    common(p, search=False)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--check-edges", action="store_true", help="also check every maximal fiber against each cap")
    p.add_argument("--edge-cap", type=int, default=DEFAULT_EDGE_CAP)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("linear-check", help="decodability of a linear encoder")
    common(p, k=False, search=False)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--matrix", required=True, help='rows separated by ";", e.g. "1,1,0;0,1,1"')
    p.set_defaults(func=cmd_linear_check)

    p = sub.add_parser("linear-search", help="shortest decodable linear encoder")
    common(p, k=False, search=False)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--tmax", type=int)
    p.set_defaults(func=cmd_linear_search)

    p = sub.add_parser("concat", help="larger-alphabet code from a verified codebook")
    p.add_argument("--codebook", required=True)
    p.add_argument("--instance")
    p.add_argument("--mode", choices=["double", "general"], default="double")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--field", type=int, help="prime field size for --mode general")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_concat)

    p = sub.add_parser("pliable", help="optimal fixed-choice code")
    common(p)
    p.add_argument("--choice", help='fixed choice, e.g. "1:2,2:1,3:1" ("1+2:3" for {1,2}, ":1" for the empty set)')
    p.add_argument("--choice-cap", type=int, default=DEFAULT_CHOICE_CAP)
    p.set_defaults(func=cmd_pliable)

    p = sub.add_parser("enumerate-edges", help="list maximal valid fibers")
    common(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_enumerate_edges)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, CapacityError, CodebookStructureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
