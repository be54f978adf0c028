"""Command-line entry point: ``lorentz <command> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lio
from .core import SpaceInputError, validate_axioms
from .generators import KINDS, GenerationError, GeneratorSpec, generate
from .metrics import MetricError

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _parse_param(text):
    if "=" not in text:
        raise UsageError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def _subset_arg(text, n):
    if text in (None, "all"):
        return np.arange(n)
    path = Path(text)
    if path.exists():
        doc = lio.read_json(path)
        ids = doc.get("ids", doc) if isinstance(doc, dict) else doc
    else:
        ids = [int(v) for v in text.split(",") if v.strip()]
    ids = np.asarray(ids, dtype=int)
    if len(ids) == 0 or ids.min() < 0 or ids.max() >= n:
        raise SpaceInputError("subset ids out of range")
    return ids


class Run:
    """Collects the manifest of one command and writes outputs with it."""

    def __init__(self, args, argv):
        self.t0 = time.perf_counter()
        config = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
        inputs = {}
        for key in ("space", "left", "right", "map", "a", "b", "slice", "shells", "inputs", "slices"):
            val = getattr(args, key, None)
            for p in (val if isinstance(val, list) else [val]):
                if isinstance(p, str) and Path(p).is_file():
                    inputs[p] = lio.file_digest(p)
        self.manifest = {
            "command": args.command,
            "config": config,
            "seeds": {k: v for k, v in config.items() if "seed" in k},
            "inputs": inputs,
            "tool": "lorentz",
            "version": __version__,
        }
        self.outputs = []

    def json(self, path, payload):
        if path is None:
            print(lio.canonical(payload))
            return
        lio.write_json(path, payload, self.manifest)
        self.outputs.append(str(path))

    def csv(self, path, M, rows=None, cols=None):
        if path is None:
            raise UsageError("CSV outputs need -o")
        lio.write_csv(path, M, rows, cols, lio.digest(self.manifest))
        self.outputs.append(str(path))

    def finish(self):
        side = dict(self.manifest, wall_time=time.perf_counter() - self.t0,
                    manifest_hash=lio.digest(self.manifest))
        for out in self.outputs:
            Path(out + ".manifest.json").write_text(json.dumps(lio._jsonable(side), indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands

def cmd_gen(args, run):
    params = dict(_parse_param(p) for p in args.param or [])
    spec = GeneratorSpec(kind=args.kind, n=args.n, sampling=args.sampling, seed=args.seed,
                         dimension=args.dimension, params=params, tau_mode=args.tau_mode)
    space, oracle = generate(spec)
    run.json(args.out, {"space": lio.space_to_dict(space), "spec": spec.to_dict(),
                        "oracle_error": oracle.error})
    return EXIT_OK


def cmd_validate(args, run):
    space = lio.load_space(args.space)
    rep = validate_axioms(space, args.tol, check_order=not args.preorder)
    payload = {"passed": rep.passed, "counts": rep.counts,
               "violations": [[a, list(w), d] for a, w, d in rep.violations]}
    run.json(args.out, payload)
    if not rep.passed and args.out is not None:
        for a, w, d in rep.violations[:20]:
            print(f"{a} {list(w)} {d:.3g}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FINDINGS


def cmd_tau(args, run):
    space = lio.load_space(args.space)
    if args.intrinsify:
        from .core import intrinsify_tau

        space = intrinsify_tau(space)
    run.csv(args.out, space.tau)
    return EXIT_OK


def _metric_table(space, args):
    from . import metrics

    U = _subset_arg(args.u, space.n)
    if args.kind == "noldus":
        table = metrics.noldus_raw(space, U, args.p, args.q)
    elif args.kind == "compact":
        table = metrics.noldus_compact(space, U)
    else:
        raise UsageError(f"unknown metric kind {args.kind!r}")
    if args.intrinsic:
        if space.coords is None:
            raise SpaceInputError("intrinsification needs coordinates for the neighbour graph")
        graph = metrics.knn_graph(space.coords[table.index], args.k)
        table = metrics.intrinsify_metric(table, graph)
    return table


def cmd_metric(args, run):
    space = lio.load_space(args.space)
    table = _metric_table(space, args)
    run.csv(args.out, table.values, table.index, table.index)
    return EXIT_OK


def _load_shells(path):
    from .metrics import Exhaustion

    doc = lio.read_json(path)
    try:
        n = int(doc["n"])
        shells = []
        for ids in doc["shells"]:
            m = np.zeros(n, dtype=bool)
            m[np.asarray(ids, dtype=int)] = True
            shells.append(m)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SpaceInputError(f"malformed shells file: {exc}") from exc
    return Exhaustion(shells, meta={k: doc.get(k) for k in ("p", "q", "mode")})


def cmd_properize(args, run):
    from . import metrics

    space = lio.load_space(args.space)
    ex = _load_shells(args.shells)
    # natural exhaustions often stall for a few steps; repeats carry no annulus
    keep = [s for k, s in enumerate(ex.shells) if k == 0 or (s != ex.shells[k - 1]).any()]
    ex = metrics.Exhaustion(keep, meta=ex.meta)
    args.u = "all"
    table = _metric_table(space, args)
    if space.coords is None:
        raise SpaceInputError("properize needs coordinates for the neighbour graph")
    out = metrics.properize(table, ex, metrics.knn_graph(space.coords, args.k))
    run.csv(args.out, out.values)
    return EXIT_OK


def cmd_exhaust(args, run):
    from .exhaustion import DoublyPointedSpace, natural_exhaustion

    space = lio.load_space(args.space)
    ex = natural_exhaustion(DoublyPointedSpace(space, args.p, args.q), args.nmax, mode=args.mode)
    run.json(args.out, {"n": space.n, "p": args.p, "q": args.q, "mode": args.mode,
                        "shells": [np.flatnonzero(s).tolist() for s in ex.shells]})
    return EXIT_OK


def cmd_glue(args, run):
    from .gluing import GluingSpec, glue, validate_gh

    left, right = lio.load_space(args.left), lio.load_space(args.right)
    seam = lio.read_json(args.map)
    pairs = seam.get("pairs", seam) if isinstance(seam, dict) else seam
    g = glue(GluingSpec.from_pairs(left, right, pairs, tol=args.tol))
    rep = validate_gh(g.space, seam=g.seam)
    run.json(args.out, {"space": lio.space_to_dict(g.space), "seam": g.seam.tolist(),
                        "h_minus": g.h_minus.tolist(), "h_plus": g.h_plus.tolist(),
                        "gh_checks": rep.checks})
    return EXIT_OK if rep.passed else EXIT_FINDINGS


def cmd_gh(args, run):
    from .exhaustion import DoublyPointedSpace
    from .ghdist import pointed_gh

    a, b = lio.load_space(args.a), lio.load_space(args.b)
    up, lo, tail = pointed_gh(DoublyPointedSpace(a, args.pa, args.qa), DoublyPointedSpace(b, args.pb, args.qb),
                              args.imax, args.budget, seed=args.seed)
    run.json(args.out, {"upper": up, "lower": lo, "tail_bound": tail})
    return EXIT_OK


def _load_slice(path, n):
    from .hades import CauchySlice

    return CauchySlice(_subset_arg(path, n))


def cmd_hades(args, run):
    from . import hades

    space = lio.load_space(args.space)
    S = _load_slice(args.slice, space.n)
    region = None if args.region is None else _subset_arg(args.region, space.n)
    if args.op == "shadow":
        pts = np.flatnonzero(hades.future_of(space, S)) if region is None else region
        E = hades.profiles(space, S, pts)
        run.csv(args.out, E, pts, S.ids)
        return EXIT_OK
    if args.op == "monotone":
        rep = hades.check_monotone(space, S, region, tol=args.tol)
        run.json(args.out, {"passed": rep.passed, "pairs": rep.pairs, "strict_pairs": rep.strict_pairs,
                            "strict_found": rep.strict_found, "order_violations": rep.order_violations,
                            "support_violations": rep.support_violations,
                            "missing_strict": rep.missing_strict})
        return EXIT_OK if rep.passed else EXIT_FINDINGS
    rep = hades.check_injective(space, S, region, tol=args.tol)
    run.json(args.out, {"collisions": rep.collisions, "support_collisions": rep.support_collisions,
                        "min_gap": rep.min_gap})
    return EXIT_OK if not rep.collisions else EXIT_FINDINGS


def cmd_compare(args, run):
    from .hades import AmbiguousMatchError, reconstruct_isometry

    a, b = lio.load_space(args.a), lio.load_space(args.b)
    if len(args.slices) != 2:
        raise UsageError("--slices expects two files")
    Sa, Sb = _load_slice(args.slices[0], a.n), _load_slice(args.slices[1], b.n)
    try:
        rep = reconstruct_isometry(a, Sa, b, Sb, tol=args.tol, strict=not args.lenient)
    except AmbiguousMatchError as exc:
        run.json(args.out, {"ambiguous": {"point": exc.point, "candidates": exc.candidates}})
        return EXIT_FINDINGS
    run.json(args.out, {"mapping": sorted(rep.mapping.items()), "unmatched": rep.unmatched,
                        "tau_defect": rep.tau_defect})
    return EXIT_OK


def cmd_report(args, run):
    rows = []
    for path in args.inputs:
        doc = lio.read_json(path)
        if "manifest" in doc:
            if lio.digest(doc["manifest"]) != doc.get("manifest_hash"):
                raise SpaceInputError(f"{path}: manifest hash mismatch")
        if "shells" in doc:
            for k, ids in enumerate(doc["shells"]):
                rows.append([path, k, len(ids)])
        else:
            body = {k: v for k, v in doc.items() if k not in ("manifest", "manifest_hash")}
            rows.append([path, "keys", len(body)])
    lines = ["file,n,size"] + [",".join(str(v) for v in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(f"# manifest_hash={lio.digest(run.manifest)}\n" + text)
        run.outputs.append(args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser():
    ap = _Parser(prog="lorentz", description="Finite sampled Lorentzian spaces.")
    ap.add_argument("--threads", type=int, default=None, help="cap on worker threads (default LORENTZ_THREADS)")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("-o", "--out", default=None)
        return p

    p = add("gen", cmd_gen, "generate a fixture")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--sampling", choices=("grid", "poisson"), default="poisson")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dimension", type=int, default=1)
    p.add_argument("--tau-mode", choices=("chain", "oracle"), default=None)
    p.add_argument("--param", action="append", help="key=value (JSON value)")

    p = add("validate", cmd_validate, "check the axioms")
    p.add_argument("space")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--preorder", action="store_true", help="skip antisymmetry")

    p = add("tau", cmd_tau, "export tau as CSV")
    p.add_argument("space")
    p.add_argument("--intrinsify", action="store_true")

    for name, func, help_ in (("metric", cmd_metric, "Noldus-type metric table"),
                              ("properize", cmd_properize, "shell-wise rescaled metric")):
        p = add(name, func, help_)
        p.add_argument("space")
        p.add_argument("--kind", choices=("noldus", "compact"), default="noldus")
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--q", type=float, default=1.0)
        p.add_argument("--k", type=int, default=8)
        if name == "metric":
            p.add_argument("--u", default="all")
            p.add_argument("--intrinsic", action="store_true")
        else:
            p.add_argument("--shells", required=True)
            p.set_defaults(intrinsic=False)

    p = add("exhaust", cmd_exhaust, "natural exhaustion shells")
    p.add_argument("space")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--mode", choices=("sequential", "repeated"), default="sequential")

    p = add("glue", cmd_glue, "glue two spaces along a seam")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--map", required=True)
    p.add_argument("--tol", type=float, default=0.0)

    p = add("gh", cmd_gh, "doubly pointed GH-type distance")
    p.add_argument("a")
    p.add_argument("b")
    for k in ("pa", "qa", "pb", "qb"):
        p.add_argument(f"--{k}", type=int, required=True)
    p.add_argument("--imax", type=int, default=4)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)

    p = add("hades", cmd_hades, "shadow profiles on a slice")
    p.add_argument("space")
    p.add_argument("--slice", required=True)
    p.add_argument("--region", default=None)
    p.add_argument("--op", choices=("shadow", "monotone", "injective"), default="shadow")
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("compare", cmd_compare, "match two developments by their profiles")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--slices", nargs=2, required=True)
    p.add_argument("--tol", type=float, default=3e-9)
    p.add_argument("--lenient", action="store_true", help="leave ambiguous points unmatched")

    p = add("report", cmd_report, "tabulate JSON artifacts as CSV")
    p.add_argument("inputs", nargs="+")
    return ap


def _limit_threads(n):
    if n is None:
        env = os.environ.get("LORENTZ_THREADS")
        n = int(env) if env else None
    if n is None:
        return None
    if n < 1:
        raise UsageError("--threads must be positive")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return None
    return threadpool_limits(n)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _limit_threads(args.threads)
        run = Run(args, argv)
        code = args.func(args, run)
        run.finish()
        return code
    except (SpaceInputError, GenerationError, MetricError, UsageError, ValueError, OSError) as exc:
        print(f"lorentz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
