"""Command-line front end.

Subcommands:
    bound        compute a certified bound for one or more instances
    alpha        run the exact branch-and-bound oracle
    export-sdpa  write the moment relaxation in SDPA sparse format
    gen-list     list the built-in graph generators

Exit codes: 0 success, 2 configuration error, 3 cap exceeded,
4 solver or certification failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import bounds, graphs, sdp, sphere
from .errors import CapExceeded, GraphFormatError, PackboundError, SolverFailure

EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_SOLVER = 4

def parse_angle(text: str) -> float:
    """Angle in radians, or with a 'deg' suffix for degrees."""
    text = text.strip()
    if text.endswith("deg"):
        return math.radians(float(text[:-3]))
    return float(text)


#: generator name -> (callable, parameter names, per-parameter converters)
GENERATORS = {
    "cycle": (graphs.generate_cycle, "n", (int,)),
    "complete": (graphs.generate_complete, "n", (int,)),
    "empty": (graphs.generate_empty, "n", (int,)),
    "petersen": (graphs.generate_petersen, "", ()),
    "code": (graphs.generate_code_graph, "q,n,d", (int, int, int)),
    "circle": (graphs.generate_circle_code, "m,theta", (int, parse_angle)),
    "cap": (graphs.generate_cap_graph, "m,theta1,theta2",
            (int, parse_angle, parse_angle)),
    "random": (graphs.generate_random, "n,p,seed", (int, float, int)),
}

#: generators that discretize a continuous geometry; their las values
#: bound only the finite subgraph, not the underlying packing problem.
SUBGRAPH_GENERATORS = {"circle", "cap"}


def parse_generator(spec: str) -> graphs.Graph:
    """Build a graph from a 'name' or 'name:p1,p2,...' spec string."""
    name, _, rest = spec.partition(":")
    if name not in GENERATORS:
        raise GraphFormatError(
            f"unknown generator {name!r}; run gen-list for choices")
    fn, params, converters = GENERATORS[name]
    tokens = [p for p in rest.split(",") if p] if rest else []
    if len(tokens) != len(converters):
        raise GraphFormatError(
            f"generator {name} expects parameters ({params}), got {spec!r}")
    try:
        args = [conv(tok) for conv, tok in zip(converters, tokens)]
    except ValueError:
        raise GraphFormatError(f"bad parameters in generator spec {spec!r}")
    return fn(*args)


def load_instance(args) -> tuple:
    """(graph, label, is_subgraph) from --gen or --file."""
    gen = getattr(args, "gen", None)
    if isinstance(gen, list):
        if len(gen) > 1:
            raise GraphFormatError("this command takes a single --gen")
        gen = gen[0] if gen else None
    if gen and getattr(args, "file", None):
        raise GraphFormatError("give either --gen or --file, not both")
    if getattr(args, "file", None):
        with open(args.file) as fh:
            return graphs.load_graph(fh.read()), args.file, False
    if gen:
        name = gen.partition(":")[0]
        return parse_generator(gen), gen, name in SUBGRAPH_GENERATORS
    raise GraphFormatError("no instance given; use --gen or --file")


def certificate_digest(certificate) -> str:
    """Stable sha256 digest of a certificate, rounded to absorb the last
    couple of floating-point digits so identical configs hash alike."""
    if certificate is None:
        return ""
    if isinstance(certificate, tuple):
        blobs = [np.round(np.atleast_1d(np.asarray(c, dtype=float)), 8)
                 for c in certificate]
    else:
        blobs = [np.round(np.asarray(certificate, dtype=float), 8)]
    h = hashlib.sha256()
    for b in blobs:
        h.update(np.ascontiguousarray(b).tobytes())
    return h.hexdigest()


def _record(label, level, value, dual, gap, status, cert, wall, extra=None):
    rec = {
        "graph": label,
        "level": level,
        "bound": value,
        "dual_bound": dual,
        "gap": gap,
        "status": status,
        "certificate_digest": certificate_digest(cert),
        "wall_time": wall,
    }
    if extra:
        rec.update(extra)
    return rec


def compute_bound(args, graph, label, subgraph) -> dict:
    t0 = time.perf_counter()
    extra = {}
    warnings = []
    if subgraph:
        warnings.append("subgraph bound: valid for this discretization only")

    if args.method == "alpha":
        res = graphs.alpha_exact(graph, weighted=args.weighted)
        rec = _record(label, None, float(res.value), float(res.value), 0.0,
                      "exact", None, time.perf_counter() - t0,
                      {"witness": sorted(res.witness)})
        rec["warnings"] = warnings
        return rec

    if args.method == "las":
        result = bounds.las_bound(graph, args.t, tol=args.tol, cap=args.cap)
        level = args.t
    elif args.method == "theta":
        result = bounds.theta(graph, tol=args.tol)
        level = 1
    elif args.method == "theta-prime":
        result = bounds.theta_prime(graph, tol=args.tol)
        level = 1
    elif args.method == "three-point":
        result = bounds.three_point_bound(graph, args.vertex, args.t,
                                          tol=args.tol, cap=args.cap)
        level = args.t
        if not args.assume_transitive:
            warnings.append("bounds 1+α(Gᵉ) only; pass --assume-transitive "
                            "for a bound on α(G)")
    else:
        raise GraphFormatError(f"unknown method {args.method!r}")

    if result.verification is not None:
        extra["verified_margin"] = max(result.verification.worst_violation,
                                       -result.verification.min_eig)
    rec = _record(label, level, result.value, result.dual_value, result.gap,
                  result.status, result.certificate,
                  time.perf_counter() - t0, extra)
    rec["warnings"] = warnings
    if args.with_alpha and graph.n <= graphs.ALPHA_GUARD:
        alpha = graphs.alpha_exact(graph, weighted=args.weighted).value
        rec["alpha"] = float(alpha)
        rec["sandwich"] = f"α ≤ {result.value:.9g}"
    return rec


def compute_delsarte(args) -> dict:
    t0 = time.perf_counter()
    theta = parse_angle(args.theta)
    result = sphere.delsarte_lp_bound(args.n, theta, args.degree,
                                      tol=args.verify_tol,
                                      solver_tol=args.tol)
    label = f"sphere(n={args.n},theta={theta:.12g})"
    extra = {
        "verified_margin": result.report.violation if result.report else None,
        "certificate": json.loads(result.to_json()),
    }
    return _record(label, args.degree, result.certified_value, result.value,
                   abs(result.certified_value - result.value), result.status,
                   result.coefficients, time.perf_counter() - t0, extra)


def emit(records, fmt, stream=None):
    stream = stream if stream is not None else sys.stdout
    if fmt == "json":
        out = records[0] if len(records) == 1 else records
        print(json.dumps(out, sort_keys=True, default=str), file=stream)
        return
    for rec in records:
        for warning in rec.get("warnings", ()):
            print(f"warning: {warning}", file=stream)
        level = rec.get("level")
        head = f"{rec['graph']}"
        if level is not None:
            head += f"  t={level}"
        print(head, file=stream)
        print(f"  bound      {rec['bound']:.9f}  [{rec['status']}]",
              file=stream)
        if rec.get("dual_bound") is not None:
            print(f"  dual       {rec['dual_bound']:.9f}  gap {rec['gap']:.2e}",
                  file=stream)
        if "verified_margin" in rec and rec["verified_margin"] is not None:
            print(f"  margin     {rec['verified_margin']:.2e}", file=stream)
        if "alpha" in rec:
            print(f"  alpha      {rec['alpha']:g}  ({rec['sandwich']})",
                  file=stream)
        print(f"  wall_time  {rec['wall_time']:.3f}s", file=stream)


def _bound_worker(payload):
    args, spec = payload
    ns = argparse.Namespace(**args)
    ns.gen, ns.file = spec if spec[1] is None else (None, spec[1])
    graph, label, subgraph = load_instance(ns)
    return compute_bound(ns, graph, label, subgraph)


def cmd_bound(args) -> int:
    if args.method == "delsarte" or args.delsarte:
        if args.n is None or args.theta is None:
            raise GraphFormatError("delsarte needs --n and --theta")
        records = [compute_delsarte(args)]
    else:
        specs = [((g, None)) for g in (args.gen or [])]
        if args.file:
            specs.append((None, args.file))
        if not specs:
            raise GraphFormatError("no instance given; use --gen or --file")
        base = {k: v for k, v in vars(args).items()
                if k not in ("gen", "file", "func")}
        payloads = [(base, spec) for spec in specs]
        if args.jobs > 1 and len(payloads) > 1:
            with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
                records = list(pool.map(_bound_worker, payloads))
        else:
            records = [_bound_worker(p) for p in payloads]
    emit(records, args.format)
    bad = [r for r in records
           if r["status"] not in ("optimal", "exact", "certified")]
    return EXIT_SOLVER if bad else 0


def cmd_alpha(args) -> int:
    graph, label, _ = load_instance(args)
    t0 = time.perf_counter()
    res = graphs.alpha_exact(graph, weighted=args.weighted)
    rec = _record(label, None, float(res.value), float(res.value), 0.0,
                  "exact", None, time.perf_counter() - t0,
                  {"witness": sorted(res.witness)})
    emit([rec], args.format)
    return 0


def cmd_export_sdpa(args) -> int:
    graph, _, _ = load_instance(args)
    prog = bounds.assemble_lasserre(graph, args.t, cap=args.cap)
    if prog.problem is None:
        raise GraphFormatError("degenerate instance; nothing to export")
    text = sdp.export_sdpa(prog.problem)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen_list(args) -> int:
    for name, (_, params, _converters) in sorted(GENERATORS.items()):
        suffix = f":{params}" if params else ""
        note = "  (subgraph bound only)" if name in SUBGRAPH_GENERATORS else ""
        print(f"{name}{suffix}{note}")
    return 0


def _add_instance_args(p):
    p.add_argument("--gen", action="append",
                   help="generator spec, e.g. cycle:5 or code:2,5,3")
    p.add_argument("--file", help="edge-list file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packbound",
        description="Certified upper bounds for independence numbers of "
                    "packing graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="compute a bound")
    _add_instance_args(p)
    p.add_argument("--method", default="las",
                   choices=["las", "theta", "theta-prime", "three-point",
                            "delsarte", "alpha"])
    p.add_argument("--t", type=int, default=1, help="hierarchy level")
    p.add_argument("--vertex", type=int, default=0,
                   help="base vertex for the three-point bound")
    p.add_argument("--assume-transitive", action="store_true",
                   help="assert vertex transitivity so the three-point "
                        "value bounds α(G)")
    p.add_argument("--delsarte", action="store_true",
                   help="shorthand for --method delsarte")
    p.add_argument("--n", type=int, help="sphere dimension")
    p.add_argument("--theta", help="minimal angle (radians or e.g. 60deg)")
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--tol", type=float, default=bounds.SOLVER_TOL)
    p.add_argument("--verify-tol", type=float, default=bounds.VERIFY_TOL)
    p.add_argument("--cap", type=int, default=20000,
                   help="independent-set basis cap")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--with-alpha", action="store_true",
                   help="also run the exact oracle and print α ≤ bound")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", default="table", choices=["json", "table"])
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("alpha", help="exact independence number")
    _add_instance_args(p)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--format", default="table", choices=["json", "table"])
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("export-sdpa", help="write the moment SDP")
    _add_instance_args(p)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--cap", type=int, default=20000)
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_export_sdpa)

    p = sub.add_parser("gen-list", help="list graph generators")
    p.set_defaults(func=cmd_gen_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GraphFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, PackboundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
