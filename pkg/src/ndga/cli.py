"""Command-line interface.

Subcommands: cs-lagrangian, flatness, riemann, knflat, depth-forms,
ncomplex.  Exit codes: 0 success, 1 input error, 2 usage error.  Output is
deterministic for fixed inputs and seed.
"""

from __future__ import annotations

import argparse
import sys

from . import chern_simons, depth, forms, knflat, ncomplex, riemann, scalar


class InputError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ndga",
        description="exact constructions around N-differential graded algebras",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for the randomized zero test on trigonometric expressions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cs-lagrangian", help="print a generalized Chern-Simons Lagrangian")
    p.add_argument("K", type=int, help="half the curvature power, 1 <= K <= 6")

    p = sub.add_parser("flatness", help="minimal flatness order of a connection file")
    p.add_argument("file")
    p.add_argument("--max-N", type=int, default=8, dest="max_n")

    p = sub.add_parser("riemann", help="Christoffel symbols, curvature, and flatness of a metric file")
    p.add_argument("file")
    p.add_argument("--max-N", type=int, default=8, dest="max_n")

    p = sub.add_parser("knflat", help="path-expansion of covariant powers")
    knsub = p.add_subparsers(dest="kn_command", required=True)
    q = knsub.add_parser("expand", help="print the expansion coefficients")
    q.add_argument("--N", type=int, required=True, dest="N")
    q.add_argument("--K", type=int, required=True, dest="K")
    q.add_argument("--infinitesimal", action="store_true")

    p = sub.add_parser("depth-forms", help="depth-bounded differential forms")
    p.add_argument("--profile", required=True,
                   help="comma-separated depth bounds, e.g. 3,2")
    dsub = p.add_subparsers(dest="depth_command", required=True)
    dsub.add_parser("nilpotency", help="measured minimal nilpotency of d")
    dsub.add_parser("table", help="generator multiplication sign table")
    q = dsub.add_parser("diff", help="differential of a parsed form")
    q.add_argument("expression")

    p = sub.add_parser("ncomplex", help="finite N-complexes")
    nsub = p.add_subparsers(dest="nc_command", required=True)
    q = nsub.add_parser("validate", help="check the nilpotency order")
    q.add_argument("file")
    q = nsub.add_parser("cohomology", help="generalized cohomology dimension table")
    q.add_argument("file")
    q = nsub.add_parser("tensor", help="measured nilpotency of a tensor product")
    q.add_argument("file1")
    q.add_argument("file2")
    return parser


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}")


def _run_cs(args, out) -> int:
    element = chern_simons.chern_simons_lagrangian(args.K)
    for line in chern_simons.render_element(element):
        print(line, file=out)
    return 0


def _run_flatness(args, out) -> int:
    try:
        connection = forms.parse_connection(_read(args.file))
    except forms.ConnectionFileError as err:
        raise InputError(f"{args.file}: {err}")
    order = forms.minimal_flatness_order(connection, args.max_n)
    if order is None:
        print(f"not flat up to {args.max_n}", file=out)
    else:
        print(f"{order}-flat", file=out)
    return 0


def _run_riemann(args, out) -> int:
    try:
        metric = riemann.parse_metric(_read(args.file))
    except riemann.MetricFileError as err:
        raise InputError(f"{args.file}: {err}")
    gamma = riemann.christoffel(metric)
    n = metric.dim
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(j, n + 1):
                fraction = gamma.entry(i, j, k)
                if fraction.is_zero():
                    continue
                value = fraction.as_expr()
                if value is not None:
                    text = scalar.render(value)
                else:
                    num, den = fraction.as_pair()
                    text = f"({scalar.render(num)}) / ({scalar.render(den)})"
                print(f"Gamma^{i}_{j}{k} = {text}", file=out)
    try:
        form = riemann.riemann_form(metric)
        for index, entries in form.components():
            label = "^".join(f"dx{i}" for i in index)
            print(f"R[{label}]:", file=out)
            for row in entries:
                print("  " + "; ".join(scalar.render(e) for e in row), file=out)
    except riemann.GrammarError:
        print("R: entries not expressible in the scalar grammar; "
              "flatness decided on cleared forms", file=out)
    order = riemann.minimal_lc_flatness_order(metric, args.max_n)
    if order is None:
        print(f"not flat up to {args.max_n}", file=out)
    else:
        print(f"{order}-flat", file=out)
    return 0


def _run_knflat(args, parser, out) -> int:
    if args.N < 1 or args.K < 2:
        parser.error("knflat expand needs --N >= 1 and --K >= 2")
    if args.infinitesimal:
        terms = knflat.infinitesimal_expansion(args.N, args.K)
        by_power = {}
        for j, coeff, vertex in terms:
            by_power.setdefault(j, {})[vertex] = coeff
        for j in range(args.N):
            element = by_power.get(j, {})
            print(f"c{j} = {knflat.render_element(element)}", file=out)
        return 0
    for j, element in knflat.nabla_power_expansion(args.N, args.K):
        print(f"c{j} = {knflat.render_element(element)}", file=out)
    return 0


def _parse_profile(text: str):
    try:
        profile = tuple(int(piece) for piece in text.split(","))
    except ValueError:
        raise InputError(f"bad profile {text!r}; expected integers like 3,2")
    try:
        return depth.check_profile(profile)
    except depth.DepthFormError as err:
        raise InputError(str(err))


def _run_depth(args, out) -> int:
    profile = _parse_profile(args.profile)
    if args.depth_command == "nilpotency":
        print(depth.minimal_nilpotency(profile), file=out)
        return 0
    if args.depth_command == "table":
        for g1, g2, value in depth.sign_table(profile):
            print(f"{g1} * {g2} = {value}", file=out)
        return 0
    try:
        form = depth.parse_form(args.expression, profile)
    except depth.DepthFormError as err:
        raise InputError(str(err))
    print(depth.render_form(depth.differential(form)), file=out)
    return 0


def _run_ncomplex(args, out) -> int:
    def load(path):
        try:
            return ncomplex.parse_complex(_read(path))
        except ncomplex.ComplexFileError as err:
            raise InputError(f"{path}: {err}")
        except ncomplex.ComplexError as err:
            raise InputError(f"{path}: {err}")

    if args.nc_command == "validate":
        c = load(args.file)
        if not ncomplex.validate(c):
            raise InputError(
                f"{args.file}: d^{c.order} is not zero; not a valid {c.order}-complex"
            )
        print(f"valid {c.order}-complex, degrees {c.lo}..{c.hi}", file=out)
        return 0
    if args.nc_command == "cohomology":
        c = load(args.file)
        if not ncomplex.validate(c):
            raise InputError(f"{args.file}: not a valid {c.order}-complex")
        for i in range(c.lo, c.hi + 1):
            for p in range(1, c.order):
                dim = ncomplex.p_cohomology_dim(c, p, i)
                print(f"H[p={p}, i={i}] = {dim}", file=out)
        for m in ncomplex.total_diagonals(c):
            total, _ = ncomplex.total_cohomology_dims(c, m)
            print(f"total[m={m}] = {total}", file=out)
        return 0
    c1, c2 = load(args.file1), load(args.file2)
    measured = ncomplex.tensor_nilpotency(c1, c2)
    bound = c1.order + c2.order - 1
    print(f"tensor nilpotency {measured} (bound {bound}, koszul sign on)", file=out)
    return 0


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        scalar.set_zero_seed(args.seed)
    try:
        if args.command == "cs-lagrangian":
            if not 1 <= args.K <= 6:
                parser.error("K must satisfy 1 <= K <= 6")
            return _run_cs(args, out)
        if args.command == "flatness":
            if args.max_n < 2:
                parser.error("--max-N must be at least 2")
            return _run_flatness(args, out)
        if args.command == "riemann":
            if args.max_n < 2:
                parser.error("--max-N must be at least 2")
            return _run_riemann(args, out)
        if args.command == "knflat":
            return _run_knflat(args, parser, out)
        if args.command == "depth-forms":
            return _run_depth(args, out)
        if args.command == "ncomplex":
            return _run_ncomplex(args, out)
        parser.error(f"unknown command {args.command!r}")
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 2


def entry() -> None:
    sys.exit(main())
