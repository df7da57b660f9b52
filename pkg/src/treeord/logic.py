"""First-order queries with the "there exist infinitely many" quantifier over
tree-automatic presentations.

Formulas compile to automata over convolutions of their free variables:
atoms become cylindrified relation automata, negation is complement
relative to the universe cylinders, ∃ is projection.  ``Einf`` is only
handled by :func:`evaluate`, once every other variable is bound.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import automata as ta
from .automata import TreeAutomaton
from .trees import BOX, Symbol, Tree, convolve, format_symbol, parse_symbol


class FormulaError(ValueError):
    """Ill-formed formula, unknown relation symbol or arity mismatch."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnsupportedFormula(FormulaError):
    """``Einf`` in a position where no automaton is built for it."""


class PresentationError(ValueError):
    """Argument outside the universe or malformed presentation."""


# -- syntax ------------------------------------------------------------------

class Formula:
    def free_vars(self) -> list[str]:
        out: list[str] = []
        self._free(set(), out)
        return out

    def has_inf(self) -> bool:
        return False


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple[str, ...]

    def _free(self, bound, out):
        for v in self.args:
            if v not in bound and v not in out:
                out.append(v)

    def __str__(self):
        return f"{self.rel}({','.join(self.args)})"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def _free(self, bound, out):
        self.body._free(bound, out)

    def has_inf(self):
        return self.body.has_inf()

    def __str__(self):
        return f"!{_paren(self.body)}"


@dataclass(frozen=True)
class Binary(Formula):
    op: str            # "&", "|" or "->"
    left: Formula
    right: Formula

    def _free(self, bound, out):
        self.left._free(bound, out)
        self.right._free(bound, out)

    def has_inf(self):
        return self.left.has_inf() or self.right.has_inf()

    def __str__(self):
        return f"{_paren(self.left)} {self.op} {_paren(self.right)}"


@dataclass(frozen=True)
class Quant(Formula):
    kind: str          # "E", "A" or "Einf"
    var: str
    body: Formula

    def _free(self, bound, out):
        self.body._free(bound | {self.var}, out)

    def has_inf(self):
        return self.kind == "Einf" or self.body.has_inf()

    def __str__(self):
        return f"{self.kind} {self.var}. {self.body}"


def _paren(f: Formula) -> str:
    return str(f) if isinstance(f, (Atom, Not)) else f"({f})"


def And(a, b):
    return Binary("&", a, b)


def Or(a, b):
    return Binary("|", a, b)


def Implies(a, b):
    return Binary("->", a, b)


def Exists(v, body):
    return Quant("E", v, body)


def Forall(v, body):
    return Quant("A", v, body)


def ExistsInf(v, body):
    return Quant("Einf", v, body)


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variables (bound ones shadow the mapping)."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(v, v) for v in f.args))
    if isinstance(f, Not):
        return Not(rename(f.body, mapping))
    if isinstance(f, Binary):
        return Binary(f.op, rename(f.left, mapping), rename(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != f.var}
    return Quant(f.kind, f.var, rename(f.body, inner))


_TOKENS = re.compile(r"\s*(?:(->)|([&|!().,])|([A-Za-z_][A-Za-z0-9_]*))")
_QUANTS = {"E", "A", "Einf"}


class _FormulaParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if not text[pos:].strip():
                break
            m = _TOKENS.match(text, pos)
            if not m:
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}",
                                         len(text) - len(text[pos:].lstrip()))
            self.toks.append((m.group(m.lastindex), m.start(m.lastindex)))
            pos = m.end()
        self.toks.append(("", len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, want=None):
        tok, pos = self.toks[self.i]
        if want is not None and tok != want:
            raise FormulaSyntaxError(f"expected {want!r}, got {tok or 'end of input'!r}", pos)
        self.i += 1
        return tok

    def ident(self):
        tok, pos = self.toks[self.i]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok or "-") or tok in _QUANTS:
            raise FormulaSyntaxError(f"expected a variable, got {tok or 'end of input'!r}", pos)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implication()
        tok, pos = self.toks[self.i]
        if tok:
            raise FormulaSyntaxError(f"unexpected {tok!r}", pos)
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok, pos = self.toks[self.i]
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in _QUANTS:
            self.take()
            v = self.ident()
            self.take(".")
            return Quant(tok, v, self.implication())
        if tok == "(":
            self.take()
            f = self.implication()
            self.take(")")
            return f
        name = self.ident()
        self.take("(")
        args = [self.ident()]
        while self.peek() == ",":
            self.take()
            args.append(self.ident())
        self.take(")")
        return Atom(name, tuple(args))


def parse_formula(text: str) -> Formula:
    return _FormulaParser(text).parse()


# -- presentations -----------------------------------------------------------

@dataclass
class Presentation:
    """Universe automaton over Σ plus relation automata over Σ_□^arity.

    Relation automata are intersected with the universe cylinders and the
    valid-convolution automaton when the presentation is built.
    """

    alphabet: tuple
    universe: TreeAutomaton
    relations: dict[str, tuple[int, TreeAutomaton]]
    name: str = "presentation"
    meta: dict = field(default_factory=dict)
    normalize: bool = True

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        if self.universe.alphabet != self.alphabet:
            raise PresentationError("universe automaton alphabet differs from Σ")
        self._domains: dict[int, TreeAutomaton] = {}
        rels = {}
        for r, (arity, A) in self.relations.items():
            if A.alphabet != ta.conv_alphabet(self.alphabet, arity):
                raise PresentationError(f"relation {r!r}: alphabet is not Σ_□^{arity}")
            rels[r] = (arity, ta.intersect(A, self.domain(arity)) if self.normalize else A)
        self.relations = rels

    def domain(self, n: int) -> TreeAutomaton:
        """Valid n-track convolutions of universe members."""
        if n not in self._domains:
            parts = [ta.valid_convolution_automaton(self.alphabet, n)]
            parts += [cylinder(self.universe, self.alphabet, n, (i,)) for i in range(n)]
            self._domains[n] = ta.intersect(*parts)
        return self._domains[n]

    def contains(self, t: Tree) -> bool:
        try:
            return ta.accepts(self.universe, t)
        except ta.AutomatonError:
            return False

    def elements(self, max_nodes: int) -> list[Tree]:
        return ta.enumerate_trees(self.universe, max_nodes)

    def holds(self, rel: str, *args: Tree) -> bool:
        arity, A = self.relations[rel]
        if len(args) != arity:
            raise FormulaError(f"{rel} has arity {arity}")
        return ta.accepts(A, convolve(args))

    # order-specific helpers; "le" names the order relation by convention
    def le(self, s: Tree, t: Tree) -> bool:
        return self.holds("le", s, t)

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "universe.aut").write_text(ta.dumps(self.universe))
        for r, (_, A) in sorted(self.relations.items()):
            (d / f"{r}.aut").write_text(ta.dumps(A))
        manifest = {
            "name": self.name,
            "alphabet": [format_symbol(a) for a in self.alphabet],
            "universe": "universe.aut",
            "relations": {r: {"arity": k, "file": f"{r}.aut"}
                          for r, (k, _) in sorted(self.relations.items())},
            "meta": self.meta,
        }
        (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_presentation(directory: str | Path) -> Presentation:
    """Load a presentation directory; ordinal presentations get their naming
    maps back from the manifest metadata."""
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    meta = manifest.get("meta", {})
    if meta.get("kind") in ("tower", "tuples", "rank-bounded"):
        from .presentations import presentation_from_meta
        return presentation_from_meta(meta)
    alphabet = tuple(parse_symbol(s) for s in manifest["alphabet"])
    universe = ta.loads((d / manifest["universe"]).read_text())
    rels = {r: (spec["arity"], ta.loads((d / spec["file"]).read_text()))
            for r, spec in manifest["relations"].items()}
    return Presentation(alphabet, universe, rels, manifest.get("name", d.name), meta)


# -- compilation ---------------------------------------------------------------

def cylinder(A: TreeAutomaton, sigma: Sequence[Symbol], n: int,
             positions: Sequence[int]) -> TreeAutomaton:
    """Lift an automaton over Σ (one position, plain symbols) or Σ_□^r
    (r positions, tuple symbols) to n-track convolutions, reading the
    given tracks."""
    plain = A.alphabet == tuple(sigma)

    def h(s):
        picked = tuple(s[i] for i in positions)
        if all(x == BOX for x in picked):
            return None
        return picked[0] if plain else picked

    return ta.relabel(A, ta.conv_alphabet(sigma, n), h)


def equality_automaton(sigma: Sequence[Symbol]) -> TreeAutomaton:
    def step(a, s0, s1):
        ok = s0 and s1 and a[0] == a[1] and a[0] != BOX
        return bool(ok)
    return ta.explore(ta.conv_alphabet(sigma, 2), True, step, bool)


def _lookup(ctx: Sequence[str], v: str) -> int:
    for i in range(len(ctx) - 1, -1, -1):
        if ctx[i] == v:
            return i
    raise FormulaError(f"variable {v!r} is not bound")


def _relation(P: Presentation, rel: str):
    if rel in P.relations:
        return P.relations[rel]
    if rel == "eq":
        return 2, equality_automaton(P.alphabet)
    raise FormulaError(f"unknown relation symbol {rel!r}")


def _compile(f: Formula, P: Presentation, ctx: tuple[str, ...]):
    """Automaton over Σ_□^len(ctx), or a bool when ctx is empty."""
    n = len(ctx)
    if isinstance(f, Atom):
        arity, A = _relation(P, f.rel)
        if len(f.args) != arity:
            raise FormulaError(f"{f.rel} has arity {arity}, used with {len(f.args)}")
        pos = [_lookup(ctx, v) for v in f.args]
        return ta.intersect(cylinder(A, P.alphabet, n, pos), P.domain(n))
    if isinstance(f, Not):
        body = _compile(f.body, P, ctx)
        if n == 0:
            return not body
        return ta.product(P.domain(n), body, "diff")
    if isinstance(f, Binary):
        left = _compile(f.left, P, ctx)
        right = _compile(f.right, P, ctx)
        if n == 0:
            return {"&": left and right, "|": left or right, "->": (not left) or right}[f.op]
        if f.op == "->":
            left = ta.product(P.domain(n), left, "diff")
            op = "|"
        else:
            op = f.op
        return ta.product(left, right, "and" if op == "&" else "or")
    if isinstance(f, Quant):
        if f.kind == "Einf":
            raise UnsupportedFormula("Einf is only supported in evaluate(), with every "
                                     "other variable bound to a tree")
        if f.kind == "A":
            return _compile(Not(Exists(f.var, Not(f.body))), P, ctx)
        body = _compile(f.body, P, ctx + (f.var,))
        if n == 0:
            return not ta.is_empty(body)
        return ta.project(body, P.alphabet, n + 1, n)
    raise FormulaError(f"not a formula: {f!r}")


def compile_formula(f: Formula | str, P: Presentation,
                    free_vars: Sequence[str] | None = None) -> TreeAutomaton:
    """Automaton recognizing the tuples (in ``free_vars`` order) satisfying ``f``."""
    if isinstance(f, str):
        f = parse_formula(f)
    fv = f.free_vars()
    order = tuple(free_vars) if free_vars is not None else tuple(fv)
    missing = [v for v in fv if v not in order]
    if missing:
        raise FormulaError(f"free variables {missing} not in the variable order")
    if not order:
        raise FormulaError("compile needs at least one free variable; use evaluate for sentences")
    if len(set(order)) != len(order):
        raise FormulaError("repeated variable in the variable order")
    return _compile(f, P, order)


def fix_tracks(A: TreeAutomaton, sigma: Sequence[Symbol], n: int,
               values: Mapping[int, Tree]) -> TreeAutomaton:
    """Bind tracks to constant trees: intersect with singleton cylinders,
    then project those tracks away (highest index first)."""
    for i, s in values.items():
        single = ta.singleton_automaton(sigma, s)
        A = ta.intersect(A, cylinder(single, sigma, n, (i,)))
    for i in sorted(values, reverse=True):
        A = ta.project(A, sigma, n, i)
        n -= 1
    return A


def to_plain(A: TreeAutomaton, sigma: Sequence[Symbol]) -> TreeAutomaton:
    """A one-track automaton as an automaton over Σ."""
    return ta.relabel(A, tuple(sigma), lambda a: (a,))


def _check_member(P: Presentation, v: str, t: Tree) -> None:
    if not isinstance(t, Tree) or not P.contains(t):
        raise PresentationError(f"value for {v!r} is not in the universe")


def evaluate(f: Formula | str, P: Presentation, assignment: Mapping[str, Tree] | None = None) -> bool:
    """Truth value of ``f`` in the presented structure under ``assignment``."""
    if isinstance(f, str):
        f = parse_formula(f)
    assignment = dict(assignment or {})
    for v in f.free_vars():
        if v not in assignment:
            raise PresentationError(f"free variable {v!r} has no value")
        _check_member(P, v, assignment[v])
    return _evaluate(f, P, assignment)


def _evaluate(f: Formula, P: Presentation, env: Mapping[str, Tree]) -> bool:
    if not f.has_inf():
        fv = f.free_vars()
        if not fv:
            return bool(_compile(f, P, ()))
        A = _compile(f, P, tuple(fv))
        return ta.accepts(A, convolve([env[v] for v in fv]))
    if isinstance(f, Not):
        return not _evaluate(f.body, P, env)
    if isinstance(f, Binary):
        left = _evaluate(f.left, P, env)
        if f.op == "&":
            return left and _evaluate(f.right, P, env)
        if f.op == "|":
            return left or _evaluate(f.right, P, env)
        return (not left) or _evaluate(f.right, P, env)
    if isinstance(f, Quant) and f.kind == "Einf":
        if f.body.has_inf():
            raise UnsupportedFormula("nested Einf is not supported")
        return ta.is_infinite(inf_witness_language(f.body, f.var, P, env))
    raise UnsupportedFormula("Einf under a quantifier is not supported: "
                             "bind the quantified variable instead")


def inf_witness_language(body: Formula, var: str, P: Presentation,
                         env: Mapping[str, Tree]) -> TreeAutomaton:
    """Automaton over Σ for ``{x : body(x, env)}``."""
    others = [v for v in body.free_vars() if v != var]
    ctx = (var,) + tuple(others)
    A = _compile(body, P, ctx)
    A = fix_tracks(A, P.alphabet, len(ctx), {i + 1: env[v] for i, v in enumerate(others)})
    return to_plain(A, P.alphabet)


def parameter_language(f: Formula | str, P: Presentation, var: str,
                       params: Mapping[str, Tree]) -> TreeAutomaton:
    """``f(·, params)`` as an automaton over Σ; ``f`` must be compilable."""
    if isinstance(f, str):
        f = parse_formula(f)
    for v, t in params.items():
        _check_member(P, v, t)
    return inf_witness_language(f, var, P, params)


def restrict_to_initial_segment(P: Presentation, bound: Tree,
                                name: str | None = None) -> Presentation:
    """The initial segment of elements strictly below ``bound`` (by ``le``)."""
    _check_member(P, "bound", bound)
    below = parameter_language("le(x,c) & !eq(x,c)", P, "x", {"c": bound})
    rels = {}
    for r, (k, A) in P.relations.items():
        parts = [A] + [cylinder(below, P.alphabet, k, (i,)) for i in range(k)]
        rels[r] = (k, ta.intersect(*parts))
    # drop "kind" so loading does not rebuild the unrestricted presentation
    meta = {k: v for k, v in P.meta.items() if k != "kind"}
    if "kind" in P.meta:
        meta["restricted_from"] = P.meta["kind"]
    return Presentation(P.alphabet, below, rels, name or f"{P.name}|<bound", meta)
