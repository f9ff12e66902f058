"""Command-line front end: ``horolab reduce|hecke|run|limit|eigcheck``.

Exit codes: 0 success (a verdict is data, not a status), 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import __version__
from .config import ConfigError, RunManifest, dumps, load, write_outputs
from .experiments import (compare_report, horocycle_run, rational_limit_mc,
                          verify_hecke_pointwise)
from .hecke import (EnumerationError, coset_reps_T, double_coset_check,
                    enumerate_gamma_cosets)
from .modular import ReductionError, reduce
from .observables import parse_observable
from .sl2 import UHPoint

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    pass


def format_point(z: UHPoint) -> str:
    x, y = z.x, z.y
    ys = "" if abs(y - 1) < 1e-12 else f"{y:.12g}"
    if abs(x) < 1e-12:
        return f"{ys}i"
    return f"{x:.12g}{'+' if y >= 0 else '-'}{ys}i"


def _seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HOROLAB_SEED")
    return int(env) if env is not None else None


def cmd_reduce(args):
    if not (math.isfinite(args.x) and math.isfinite(args.y) and args.y > 0):
        raise InputError("need finite x and y > 0")
    r = reduce(UHPoint(args.x, args.y))
    print(f"{format_point(r.z)}, witness {r.witness}")


def _coprime(p, q):
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise InputError(f"need coprime positive p, q; got ({p}, {q})")


def cmd_hecke(args):
    if args.what == "reps":
        l, m = args.a, args.b
        if l < 1 or m < 1 or m % l:
            raise InputError("T(l, m) needs positive l dividing m")
        for r in coset_reps_T(l, m).reps:
            print(r)
    elif args.what == "index":
        _coprime(args.a, args.b)
        s = enumerate_gamma_cosets(args.a, args.b)
        flag = "" if s.index_agrees else "  DISAGREES"
        print("M psi (p+1)(q+1)")
        print(f"{s.M} {s.psi} {s.paper_index}{flag}")
    else:
        _coprime(args.a, args.b)
        rep = double_coset_check(args.a, args.b)
        if not rep.applicable:
            print(f"not applicable: pq = {args.a * args.b} is not squarefree "
                  f"({rep.n_cosets} cosets, |T(1,pq)| = {rep.n_reps})")
        else:
            print(f"{'true' if rep.holds else 'false'}: {rep.n_cosets} <-> {rep.n_reps}")


def cmd_run(args):
    try:
        cfg = load(args.config, _seed(args))
    except (OSError, ConfigError) as exc:
        raise InputError(str(exc)) from None
    manifest = RunManifest(dumps(cfg), cfg.seed)
    result = horocycle_run(cfg, threads=args.threads)
    paths = write_outputs(result, manifest, args.out)
    for p in paths:
        print(f"wrote {p}")
    print(f"verdict: {compare_report(result).verdict}")


def _observable(spec, arity):
    try:
        obs = parse_observable(spec)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if obs.arity != arity:
        raise InputError(f"{spec} must be a {'two' if arity == 2 else 'one'}-surface observable")
    return obs


def cmd_limit(args):
    _coprime(args.p, args.q)
    phi = _observable(args.observable, 2)
    seed = _seed(args) or 0
    value, se = rational_limit_mc(phi, args.p, args.q, args.N, seed, threads=args.threads)
    s = enumerate_gamma_cosets(args.p, args.q)
    print(f"M={s.M} value={value:.17g} stderr={se:.17g} N={args.N}")
    if phi.reference_integral is not None:
        print(f"product={phi.reference_integral:.17g} "
              f"z={(value - phi.reference_integral) / se:+.3f}")


def cmd_eigcheck(args):
    _coprime(args.p, args.q)
    f2 = _observable(args.observable, 1)
    try:
        points = [complex(s.replace("i", "j")) for s in args.points]
    except ValueError:
        raise InputError("base points look like 0.3+1.7i") from None
    if any(z.imag <= 0 for z in points):
        raise InputError("base points must lie in the upper half-plane")
    rep = verify_hecke_pointwise(f2, args.p, args.q, points)
    print(rep.summary())
    for z, r in zip(points, rep.ratios):
        print(f"{z}: ratio {r:.15g}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="horolab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="horolab-out")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("reduce", help="reduce x + iy into the fundamental domain")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("hecke", help="Hecke coset tables")
    p.add_argument("what", choices=("reps", "index", "check"))
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.set_defaults(func=cmd_hecke)

    p = sub.add_parser("run", parents=[common], help="run a horocycle experiment")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("limit", parents=[common], help="Monte Carlo rational-slope limit")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("--observable", default="prod(height:2:inf:0,height:2:inf:0)")
    p.add_argument("--N", type=int, default=1_000_000)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("eigcheck", parents=[common], help="pointwise Hecke eigen-identity")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("--observable", default="eis:2:200")
    p.add_argument("--points", nargs="+", default=["1i", "1+1.3i", "-0.3+2i"])
    p.set_defaults(func=cmd_eigcheck)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ReductionError, EnumerationError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
