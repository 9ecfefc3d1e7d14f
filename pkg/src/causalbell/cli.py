"""Command-line front end.

Exit codes: 0 success, 1 a binary question answered "no", 2 usage or input
errors, 3 a guard limit was hit.  All numbers are printed as exact
rationals.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import boxes as bx
from .classes import MAX_ENUMERATION_PARTIES, classes_csv, classes_text, enumerate_classes
from .dag import GeneralBdag, IoBdag, canonical_form, canonicalize_to_io, chain_witness, level, orbit_size
from .errors import CausalBellError, GuardLimitError, ParseError
from .inequalities import (BellExpression, algebraic_max, builtin, compose_i3, expression_from_json,
                           expression_to_json, ns_bound, scan_class)
from .lp import DEFAULT_MAX_COLUMNS
from .rational import format_rational, parse_rational
from .scenario import gyni_success
from .strategies import class_membership, critical_noise, mixture_threshold

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_text(arg: str) -> str:
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def load_behavior_arg(arg: str):
    """A generator name or a behavior file."""
    if not os.path.exists(arg):
        try:
            return bx.generator(arg)
        except ValueError:
            raise ParseError(f"{arg!r} is neither a file nor a known behavior "
                             f"({', '.join(bx.BEHAVIOR_NAMES)})") from None
    return bx.load_behavior(arg)


def load_expression_arg(arg: str) -> BellExpression:
    if not os.path.exists(arg):
        try:
            return builtin(arg)
        except ValueError:
            raise ParseError(f"{arg!r} is neither a file nor a builtin expression") from None
    return expression_from_json(_read_text(arg))


def parse_class_arg(arg: str) -> IoBdag:
    return IoBdag.parse(_read_text(arg).strip())


def parse_dag_arg(arg: str):
    text = _read_text(arg).strip()
    if text.startswith("{"):
        return IoBdag.parse(text)
    return canonicalize_to_io(GeneralBdag.parse(text))


def cmd_enumerate(args, out):
    classes = enumerate_classes(args.parties, max_parties=args.max_parties)
    out.write(classes_csv(classes) if args.format == "csv" else classes_text(classes))
    return EXIT_OK


def cmd_canonicalize(args, out):
    io = parse_dag_arg(args.dag)
    canon = canonical_form(io)
    witness = chain_witness(io)
    out.write(f"io_bdag: {io.format()}\n")
    out.write(f"canonical: {canon.format()}\n")
    out.write(f"level: {level(io)}\n")
    out.write(f"orbit_size: {orbit_size(io)}\n")
    if witness is None:
        out.write("nonsignaling: not proven boring\n")
    else:
        order = ",".join(str(p + 1) for p in witness)
        out.write(f"nonsignaling: boring (chain witness {order})\n")
    return EXIT_OK


def cmd_membership(args, out):
    b = load_behavior_arg(args.behavior)
    io = parse_class_arg(args.cls)
    res = class_membership(b, io, max_columns=args.max_columns)
    if res.feasible:
        out.write("feasible\n")
        for block, lam, w in res.witness:
            out.write(f"  {res.blocks[block].format()} strategy {lam}: {format_rational(w)}\n")
        return EXIT_OK
    coeffs, bound = res.separating_inequality()
    out.write("infeasible\n")
    out.write(f"  separating inequality: sum c_k p_k <= {format_rational(bound)}\n")
    out.write("  c = " + " ".join(format_rational(v) for v in coeffs) + "\n")
    return EXIT_NO


def cmd_noise(args, out):
    b = load_behavior_arg(args.behavior)
    out.write(format_rational(critical_noise(b, parse_class_arg(args.cls),
                                             max_columns=args.max_columns)) + "\n")
    return EXIT_OK


def cmd_mix_threshold(args, out):
    nu = mixture_threshold(load_behavior_arg(args.a), load_behavior_arg(args.b),
                           parse_class_arg(args.cls), max_columns=args.max_columns)
    if nu is None:
        out.write("never\n")
        return EXIT_NO
    out.write(format_rational(nu) + "\n")
    return EXIT_OK


def cmd_bound(args, out):
    e = load_expression_arg(args.ineq)
    if args.ns:
        value = ns_bound(e, max_columns=args.max_columns)
    elif args.algebraic:
        value = algebraic_max(e)
    else:
        res = scan_class(e, parse_class_arg(args.cls), jobs=args.jobs)
        value = res.value
        if args.witness:
            out.write(f"# maximizer: {res.blocks[res.block].format()} strategy {res.strategy}\n")
    out.write(format_rational(value) + "\n")
    return EXIT_OK


def cmd_compose_i3(args, out):
    i2 = load_expression_arg(args.i2)
    e = compose_i3(i2, parse_rational(args.beta_l, "--beta-l"), parse_rational(args.beta_ns, "--beta-ns"))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(expression_to_json(e))
    out.write(f"recorded bound: {format_rational(e.bounds['star'])}\n")
    return EXIT_OK


def cmd_verify_boxes(args, out):
    records = bx.load_boxes(args.file)
    all_ok = True
    for r in records:
        ext = bx.verify_extremal(r)
        all_ok &= ext or not r.claimed_extremal
        out.write(f"box {r.id}: normalized yes, nonsignaling yes, extremal {'yes' if ext else 'no'}\n")
    out.write(f"{len(records)} boxes, {'all claims verified' if all_ok else 'extremality claim failed'}\n")
    return EXIT_OK if all_ok else EXIT_NO


def cmd_table2(args, out):
    records = bx.load_boxes(args.boxes)
    table = bx.reproduce_noise_table(records, max_columns=args.max_columns)
    out.write(table.to_csv())
    if args.reference is None:
        return EXIT_OK
    ref = (bx.reference_noise_table() if args.reference == "builtin"
           else bx.read_noise_table(_read_text(args.reference)))
    bad = table.compare(ref)
    for bid, cls, expected, got in bad:
        got_s = format_rational(got) if got is not None and not isinstance(got, str) else got
        exp_s = format_rational(expected) if not isinstance(expected, str) else expected
        out.write(f"# mismatch box {bid} class {cls}: expected {exp_s}, computed {got_s}\n")
    out.write(f"# {'matches reference' if not bad else f'{len(bad)} mismatches'}\n")
    return EXIT_OK if not bad else EXIT_NO


def cmd_gyni(args, out):
    b = load_behavior_arg(args.behavior)
    out.write(format_rational(gyni_success(b, direction=args.direction)) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="causalbell", description="Exact tools for causal classes of Bell scenarios.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_guard(sp):
        sp.add_argument("--max-columns", type=int, default=DEFAULT_MAX_COLUMNS,
                        help="refuse LPs with more strategy columns than this")
        return sp

    sp = sub.add_parser("enumerate", help="list IO BDAG classes up to party permutation")
    sp.add_argument("--parties", type=int, required=True)
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    sp.add_argument("--max-parties", type=int, default=MAX_ENUMERATION_PARTIES)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("canonicalize", help="IO form and class representative of a Bell DAG")
    sp.add_argument("--dag", required=True, help="'{(1),(1,2)}', '3: L->x1, a1->a2' or a file")
    sp.set_defaults(func=cmd_canonicalize)

    sp = with_guard(sub.add_parser("membership", help="is a behavior in a causal class"))
    sp.add_argument("--behavior", required=True)
    sp.add_argument("--class", dest="cls", required=True)
    sp.set_defaults(func=cmd_membership)

    sp = with_guard(sub.add_parser("noise", help="critical white-noise weight"))
    sp.add_argument("--behavior", required=True)
    sp.add_argument("--class", dest="cls", required=True)
    sp.set_defaults(func=cmd_noise)

    sp = with_guard(sub.add_parser("mix-threshold", help="critical weight of a second behavior"))
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--class", dest="cls", required=True)
    sp.set_defaults(func=cmd_mix_threshold)

    sp = with_guard(sub.add_parser("bound", help="class, nonsignaling or algebraic bound"))
    sp.add_argument("--ineq", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--class", dest="cls")
    g.add_argument("--ns", action="store_true")
    g.add_argument("--algebraic", action="store_true")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--witness", action="store_true", help="also print a maximizing strategy")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("compose-i3", help="tripartite composite of a bipartite expression")
    sp.add_argument("--i2", required=True)
    sp.add_argument("--beta-l", required=True)
    sp.add_argument("--beta-ns", required=True)
    sp.add_argument("--output", help="write the composite expression here")
    sp.set_defaults(func=cmd_compose_i3)

    sp = sub.add_parser("verify-boxes", help="check a box file")
    sp.add_argument("--file", required=True)
    sp.set_defaults(func=cmd_verify_boxes)

    sp = with_guard(sub.add_parser("table2", help="critical noise of boxes for the 7 interesting classes"))
    sp.add_argument("--boxes", required=True)
    sp.add_argument("--reference", help="reference CSV, or 'builtin' for the bundled table")
    sp.set_defaults(func=cmd_table2)

    sp = sub.add_parser("gyni", help="guess-your-neighbour's-input winning probability")
    sp.add_argument("--behavior", required=True)
    sp.add_argument("--direction", type=int, choices=(1, -1), default=1)
    sp.set_defaults(func=cmd_gyni)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except GuardLimitError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_GUARD
    except (CausalBellError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
