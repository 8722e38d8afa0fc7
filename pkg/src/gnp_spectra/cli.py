"""Command-line interface: ``gnp-spectra <command> ...``.

Exit codes: 0 success, 2 usage / domain / config errors, 3 power iteration
did not converge, 4 work budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .certificate import certificate_gap, certify
from .degree_model import delta_p
from .eigen import DEFAULT_MAX_ITER, DEFAULT_TOL, NonConvergenceError, lambda1_dense, lambda1_power
from .graph_core import GraphFormatError, gen_gnp, read_edgelist, write_edgelist
from .harness import (
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    run_experiment,
    write_csv,
    write_jsonl,
    write_summary,
)
from .structure import BudgetExceededError, lemma_checks, structure_report

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_DOMAIN = 2
EXIT_NONCONVERGENCE = 3
EXIT_BUDGET = 4

SOUNDNESS_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2 on usage errors; keep messages on stderr
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def cmd_gen(args) -> int:
    g = gen_gnp(args.n, args.p, args.seed)
    write_edgelist(g, args.out)
    print(f"wrote n={g.n} m={g.m} to {args.out}", file=sys.stderr)
    return EXIT_OK


def _solve(g, args):
    if args.method == "dense":
        return lambda1_dense(g)
    return lambda1_power(g, tol=args.tol, max_iter=args.max_iter)


def cmd_lambda1(args) -> int:
    g = read_edgelist(args.inp)
    res = _solve(g, args)
    if args.json:
        print(_dump(res.to_dict()))
    else:
        print(f"{res.lambda1:.12f}")
    return EXIT_OK


def cmd_deltap(args) -> int:
    dp = delta_p(args.n, args.p)
    if args.json:
        print(_dump(dp.to_dict()))
    else:
        d = dp.to_dict()
        print(dp.value)
        print(f"f(delta_p) = {d['f_at_value']:.6g}")
        if d["f_at_next"] is not None:
            print(f"f(delta_p + 1) = {d['f_at_next']:.6g}")
        if dp.knife_edge:
            print("warning: knife edge, |f| within 1e-9 of zero at the crossing")
    return EXIT_OK


def cmd_lemmas(args) -> int:
    g = read_edgelist(args.inp)
    dp = delta_p(g.n, args.p)
    report = structure_report(g, dp)
    doc = report.to_dict()
    if args.json:
        print(_dump(doc))
    else:
        for key, value in doc.items():
            print(f"{key}: {value}")
        for key, ok in lemma_checks(report).items():
            print(f"check {key}: {ok}")
    return EXIT_OK


def cmd_certify(args) -> int:
    g = read_edgelist(args.inp)
    dp = delta_p(g.n, args.p)
    cert = certify(g, dp)
    spec = lambda1_power(g, tol=args.tol, max_iter=args.max_iter)
    sound = cert.upper_bound >= spec.lambda1 - SOUNDNESS_TOL
    doc = cert.to_dict()
    doc["lambda1"] = spec.lambda1
    doc["gap"] = certificate_gap(cert, spec)
    doc["sound"] = sound
    if args.json:
        print(_dump(doc))
    else:
        print(f"regime: {doc['regime']}  ({cert.combination})")
        for t in cert.terms:
            flag = "" if t.assumptions_held else "  [assumption failed]"
            fb = "  [fallback]" if t.fallback_used else ""
            print(f"  {t.label:>12} {t.rule:<18} {t.value:.6f}{flag}{fb}")
        print(f"upper_bound: {cert.upper_bound:.6f}")
        print(f"lower_bound: {cert.lower_bound:.6f}")
        print(f"lambda1:     {spec.lambda1:.6f}")
        print(f"gap: {doc['gap']:.4f}  sound: {sound}")
    return EXIT_OK if sound else EXIT_INVARIANT


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    out = args.out or cfg.out_path
    if not out:
        raise ConfigError("no output path: pass --out or set out_path in the config")
    records = write_jsonl(run_experiment(cfg), out)
    summary_path = Path(str(out) + ".summary.json")
    write_summary(cfg, records, summary_path)
    if args.csv:
        write_csv(records, args.csv)
    print(f"{len(records)} records -> {out}; summary -> {summary_path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gnp-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="sample G(n, p) and write an edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    def solver_flags(q):
        q.add_argument("--tol", type=float, default=DEFAULT_TOL)
        q.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)

    p = sub.add_parser("lambda1", help="largest adjacency eigenvalue of an edge list")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--method", choices=["power", "dense"], default="power")
    solver_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lambda1)

    p = sub.add_parser("deltap", help="degree threshold Delta_p")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_deltap)

    p = sub.add_parser("lemmas", help="structural report of an edge list")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("certify", help="upper-bound certificate checked against lambda1")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--p", type=float, required=True)
    solver_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("experiment", help="run a seeded Monte-Carlo experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--csv", help="also export the scalar fields as CSV")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except BudgetExceededError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as err:
        print(f"invariant violated: {err}", file=sys.stderr)
        return EXIT_INVARIANT
    except (GraphFormatError, ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
