"""Command-line interface.

Exit codes: 0 success, 1 invalid argument, 2 size cap exceeded, 3 parse
error (including malformed command lines), 4 verification failure,
5 tree not T2-free.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import automata as ta
from . import decomposition as dc
from . import logic
from . import ordinals as od
from . import presentations as pr
from . import ranks as rk
from .trees import TreeError, dumps, loads

EXIT_OK, EXIT_ARG, EXIT_CAP, EXIT_PARSE, EXIT_VERIFY, EXIT_NOT_T2FREE = 0, 1, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_presentation(path: str) -> logic.Presentation:
    d = Path(path)
    if not (d / "manifest.json").exists():
        raise _Failure(EXIT_ARG, f"{path}: no manifest.json")
    return logic.load_presentation(d)


def _read_tree(path: str):
    return loads(Path(path).read_text())


def _bindings(P, items: list[str], ordinal_items: list[str]) -> dict:
    env = {}
    for item in items or []:
        name, sep, path = item.partition("=")
        if not sep:
            raise _Failure(EXIT_PARSE, f"--bind expects name=file, got {item!r}")
        env[name] = _read_tree(path)
    for item in ordinal_items or []:
        name, sep, expr = item.partition("=")
        if not sep:
            raise _Failure(EXIT_PARSE, f"--bind-ordinal expects name=ordinal, got {item!r}")
        if not isinstance(P, pr.OrdinalPresentation):
            raise _Failure(EXIT_ARG, "--bind-ordinal needs an ordinal presentation")
        env[name] = P.encode(od.parse_ordinal(expr))
    return env


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_build(args) -> int:
    if args.kind == "tower":
        P = pr.build_omega_tower(args.k)
    else:
        if args.alpha is None:
            raise _Failure(EXIT_ARG, "rank-bounded needs --alpha")
        P = pr.build_rank_bounded(od.parse_ordinal(args.alpha), args.k)
    P.save(args.out)
    print(f"wrote {P.name} (order type {P.order_type}) to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    P = _load_presentation(args.presentation)
    env = _bindings(P, args.bind, args.bind_ordinal)
    print("true" if logic.evaluate(args.formula, P, env) else "false")
    return EXIT_OK


def cmd_compile(args) -> int:
    P = _load_presentation(args.presentation)
    free = args.vars.split(",") if args.vars else None
    A = logic.compile_formula(args.formula, P, free_vars=free)
    _write(ta.dumps(A), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    P = _load_presentation(args.presentation)
    env = _bindings(P, args.bind, args.bind_ordinal)
    report = dc.decompose(P, args.formula, env, var=args.var)
    ok = dc.verify_report(report, args.budget, args.seed)
    if args.out:
        report.save(args.out)
    else:
        sys.stdout.write(report.dumps())
    print(f"{len(report.classes)} classes, verification {'passed' if ok else 'FAILED'}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_rank(args) -> int:
    if args.dfa:
        T = rk.RegularBinaryTree(ta.loads_word(Path(args.dfa).read_text()))
    elif args.presentation:
        T = rk.RegularBinaryTree.from_presentation(_load_presentation(args.presentation))
    else:
        raise _Failure(EXIT_ARG, "rank needs --dfa or --presentation")
    rank = rk.cb_star_rank(T)
    index = rk.subtree_index(T)
    rep = rk.antichain_bound_check(T, args.depth)
    print(f"cb_star_rank: {rank}")
    print(f"subtree_index: {index}")
    print(f"antichain: max {rep.max_found} <= bound {rep.bound} at depth {rep.depth}: "
          f"{'holds' if rep.holds else 'VIOLATED'}")
    return EXIT_OK if rep.holds else EXIT_VERIFY


def cmd_ordinal(args) -> int:
    a = od.parse_ordinal(args.expr)
    print(a)
    if args.ranks:
        print(f"fc={od.fc_rank(a)}")
        print(f"vd*={od.vd_star_rank(a)}" if a else "vd*=undefined")
    return EXIT_OK


def _ordinal_presentation(path: str) -> pr.OrdinalPresentation:
    P = _load_presentation(path)
    if not isinstance(P, pr.OrdinalPresentation):
        raise _Failure(EXIT_ARG, f"{path} is not an ordinal presentation")
    return P


def cmd_encode(args) -> int:
    P = _ordinal_presentation(args.presentation)
    _write(dumps(P.encode(od.parse_ordinal(args.alpha))), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    P = _ordinal_presentation(args.presentation)
    print(P.decode(_read_tree(args.tree)))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    P = _load_presentation(args.presentation)
    if not 0 <= args.max_nodes <= 12:
        raise ta.ResourceError("--max-nodes must be within 0..12")
    for t in P.elements(args.max_nodes):
        line = " ".join(dumps(t).split())
        if args.decode and isinstance(P, pr.OrdinalPresentation):
            line = f"{P.decode(t)}\t{line}"
        print(line)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from . import selftest
    failures = selftest.run(args.seed, args.rounds)
    for name, bad in failures.items():
        print(f"{name}: {'ok' if not bad else f'{bad} failures'}")
    return EXIT_OK if not any(failures.values()) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treeord", description="Tree-automatic ordinals, FO queries, decompositions and ranks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build an ordinal presentation")
    b.add_argument("kind", choices=["tower", "rank-bounded"])
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--alpha")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    for name, func in (("eval", cmd_eval), ("decompose", cmd_decompose)):
        e = sub.add_parser(name)
        e.add_argument("--presentation", required=True)
        e.add_argument("--formula", required=True)
        e.add_argument("--bind", action="append", metavar="NAME=TREEFILE")
        e.add_argument("--bind-ordinal", action="append", metavar="NAME=ORDINAL")
        e.set_defaults(func=func)
        if name == "decompose":
            e.add_argument("--var", default="x")
            e.add_argument("--budget", type=int, default=200)
            e.add_argument("--seed", type=int, default=0)
            e.add_argument("--out")

    c = sub.add_parser("compile")
    c.add_argument("--presentation", required=True)
    c.add_argument("--formula", required=True)
    c.add_argument("--vars", help="comma-separated track order")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile)

    r = sub.add_parser("rank")
    r.add_argument("--dfa")
    r.add_argument("--presentation")
    r.add_argument("--depth", type=int, default=5)
    r.set_defaults(func=cmd_rank)

    o = sub.add_parser("ordinal")
    o.add_argument("expr")
    o.add_argument("--ranks", action="store_true")
    o.set_defaults(func=cmd_ordinal)

    en = sub.add_parser("encode")
    en.add_argument("--presentation", required=True)
    en.add_argument("--alpha", required=True)
    en.add_argument("--out")
    en.set_defaults(func=cmd_encode)

    de = sub.add_parser("decode")
    de.add_argument("--presentation", required=True)
    de.add_argument("--tree", required=True)
    de.set_defaults(func=cmd_decode)

    li = sub.add_parser("enumerate")
    li.add_argument("--presentation", required=True)
    li.add_argument("--max-nodes", type=int, default=5)
    li.add_argument("--decode", action="store_true")
    li.set_defaults(func=cmd_enumerate)

    st = sub.add_parser("selftest")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--rounds", type=int, default=50)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ta.ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (od.OrdinalSyntaxError, logic.FormulaSyntaxError, TreeError, ta.AutomatonError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except rk.NotT2Free as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_T2FREE
    except (logic.FormulaError, logic.PresentationError, od.OrdinalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARG


if __name__ == "__main__":
    sys.exit(main())
