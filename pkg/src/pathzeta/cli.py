"""Command line entry point: ``pathzeta <subcommand> ...``.

Exit status: 0 success, 1 a validation check failed, 2 bad usage, config or
input file, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import math
import sys
from pathlib import Path

from . import closed_forms as cf
from .diagram_metrics import distance, read_diagram_csv
from .errors import ConfigError, InvalidParameterError, ParseError, PathZetaError
from .harness import OUTPUT_ENV, ExperimentConfig, run
from .persistence_core import barcode_to_csv, superlevel_barcode
from .process_sim import read_path_csv

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = ExperimentConfig.from_json(text)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
        cfg.validate()
    status, out, result = run(cfg, args.output)
    for r in result.rows:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.quantity} x={r.x:g} eps={r.eps:g} "
              f"mean={r.mean:.6g} target={r.target:.6g} z={r.z:.3g}")
    print(f"wrote {out / 'summary.csv'} and {out / 'manifest.json'}")
    if not result.rows:
        print("error: run aborted, see manifest.json", file=sys.stderr)
        return EXIT_NUMERIC
    return status


def _cmd_barcode(args) -> int:
    _, values = read_path_csv(args.input)
    csv = barcode_to_csv(superlevel_barcode(values))
    Path(args.output).write_text(csv)
    return EXIT_OK


def _expand(token: str) -> list[float]:
    """'0.1,0.2' -> list; 'a:b:n' -> n points from a to b inclusive."""
    if token.count(":") == 2:
        a, b, k = token.split(":")
        k = int(k)
        a, b = float(a), float(b)
        return [a + (b - a) * i / (k - 1) for i in range(k)] if k > 1 else [a]
    return [float(v) for v in token.split(",")]


def _cmd_zeta_eval(args) -> int:
    q = cf.QUANTITIES.get(args.quantity)
    if q is None:
        print(f"error: unknown quantity {args.quantity!r}; choose from {', '.join(sorted(cf.QUANTITIES))}",
              file=sys.stderr)
        return EXIT_USAGE
    params = list(args.params)
    if len(params) == len(q.params) - 1 and q.params[-1] == "t":
        params.append("1")
    if len(params) != len(q.params):
        print(f"error: {q.name} takes ({', '.join(q.params)})", file=sys.stderr)
        return EXIT_USAGE
    try:
        axes = [_expand(p) for p in params]
    except ValueError as exc:
        print(f"error: bad parameter list: {exc}", file=sys.stderr)
        return EXIT_USAGE
    grid = list(itertools.product(*axes))
    policy = cf.EvalPolicy(tol=args.tol) if args.tol else cf.DEFAULT_POLICY
    sys.stdout.write(cf.tabulate(q.name, grid, policy))
    return EXIT_OK


def _cmd_wasserstein(args) -> int:
    p = math.inf if args.p.lower() in ("inf", "infinity") else float(args.p)
    a = read_diagram_csv(args.a)
    b = read_diagram_csv(args.b)
    print(f"{distance(a, b, p):.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pathzeta", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a validation experiment described by a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--output", help=f"output directory (default: config 'output', ${OUTPUT_ENV}, ./pathzeta-output)")
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("barcode", help="superlevel barcode of a time,value CSV")
    b.add_argument("input")
    b.add_argument("output")
    b.set_defaults(func=_cmd_barcode)

    z = sub.add_parser("zeta-eval", help="tabulate a closed form over a parameter grid")
    z.add_argument("quantity", help="one of: " + ", ".join(sorted(cf.QUANTITIES)))
    z.add_argument("params", nargs="*", help="values, comma lists or a:b:n ranges; a trailing t may be omitted")
    z.add_argument("--tol", type=float, default=None, help="absolute series tolerance")
    z.set_defaults(func=_cmd_zeta_eval)

    w = sub.add_parser("wasserstein", help="distance between two diagram CSVs")
    w.add_argument("a")
    w.add_argument("b")
    w.add_argument("--p", default="2", help="order >= 1, or inf for bottleneck")
    w.set_defaults(func=_cmd_wasserstein)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError, InvalidParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PathZetaError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
