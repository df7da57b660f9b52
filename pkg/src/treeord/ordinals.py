"""Ordinals below ω^(ω^ω) in Cantor normal form.

An ordinal is a decreasing list of ``ω^exponent · coefficient`` terms whose
exponents are again :class:`CNF` values.  Besides comparison and the ordinary
operations this module provides the natural (Hessenberg) sum and product and
the FC / VD_* rank formulas for ordinals.

Surface syntax: ``w^(w)*1 + w^(2)*3 + 5``; expressions may also use ``+``,
``*`` (ordinary), ``nat+(a, b)``, ``nat*(a, b)``, ``w^(expr)`` and parentheses.
"""

from __future__ import annotations

import functools
import re
from typing import Iterable

TOWER_LIMIT = 3


class OrdinalError(ValueError):
    """Invalid CNF data, tower height overflow or undefined rank."""


class OrdinalSyntaxError(OrdinalError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@functools.total_ordering
class CNF:
    """An ordinal ``Σ ω^{e_i}·k_i`` with strictly decreasing exponents and
    positive coefficients; the empty sum is 0."""

    __slots__ = ("terms", "height", "_hash")

    def __init__(self, terms: Iterable[tuple["CNF", int]] = (), limit: int | None = None):
        terms = tuple((e if isinstance(e, CNF) else CNF.of(e), int(k)) for e, k in terms)
        for i, (e, k) in enumerate(terms):
            if k <= 0:
                raise OrdinalError(f"non-positive coefficient {k}")
            if i and compare(terms[i - 1][0], e) <= 0:
                raise OrdinalError("exponents must be strictly decreasing")
        self.terms = terms
        self.height = 1 + max(e.height for e, _ in terms) if terms else 0
        cap = TOWER_LIMIT if limit is None else limit
        if self.height > cap:
            raise OrdinalError(f"tower height {self.height} exceeds limit {cap} "
                               "(only ordinals below w^(w^w) are supported)")
        self._hash = hash(terms)

    @classmethod
    def of(cls, n: int) -> "CNF":
        if n < 0:
            raise OrdinalError("negative natural number")
        return ZERO if n == 0 else cls(((ZERO, n),))

    def __eq__(self, other):
        if isinstance(other, int):
            other = CNF.of(other) if other >= 0 else None
        if not isinstance(other, CNF):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        if isinstance(other, int):
            other = CNF.of(other)
        if not isinstance(other, CNF):
            return NotImplemented
        return compare(self, other) < 0

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"CNF({self})"

    def __str__(self):
        return format_cnf(self)

    def __add__(self, other):
        return ordinary_sum(self, _coerce(other))

    def __radd__(self, other):
        return ordinary_sum(_coerce(other), self)

    def __mul__(self, other):
        return ordinary_product(self, _coerce(other))

    def __rmul__(self, other):
        return ordinary_product(_coerce(other), self)

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0])

    def __int__(self):
        if not self.is_finite():
            raise OrdinalError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    @property
    def leading_exponent(self) -> "CNF":
        if not self.terms:
            raise OrdinalError("0 has no leading exponent")
        return self.terms[0][0]

    def coefficient(self, exponent: "CNF") -> int:
        for e, k in self.terms:
            if e == exponent:
                return k
        return 0


def _coerce(x) -> CNF:
    if isinstance(x, CNF):
        return x
    if isinstance(x, int):
        return CNF.of(x)
    raise TypeError(f"cannot use {x!r} as an ordinal")


ZERO = CNF.__new__(CNF)
ZERO.terms = ()
ZERO.height = 0
ZERO._hash = hash(())
ONE = CNF(((ZERO, 1),))
OMEGA = CNF(((ONE, 1),))


def omega_power(e: CNF | int, k: int = 1) -> CNF:
    """``ω^e · k``."""
    if k == 0:
        return ZERO
    return CNF(((_coerce(e), k),))


def compare(a: CNF, b: CNF) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    for (ea, ka), (eb, kb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c:
            return c
        if ka != kb:
            return -1 if ka < kb else 1
    if len(a.terms) == len(b.terms):
        return 0
    return -1 if len(a.terms) < len(b.terms) else 1


def natural_sum(a: CNF, b: CNF) -> CNF:
    """Hessenberg sum: add coefficients of equal exponents."""
    coeff: dict[CNF, int] = {}
    for e, k in a.terms + b.terms:
        coeff[e] = coeff.get(e, 0) + k
    return CNF(sorted(coeff.items(), key=functools.cmp_to_key(lambda x, y: compare(y[0], x[0]))))


def natural_product(a: CNF, b: CNF) -> CNF:
    """Hessenberg product: multiply as polynomials, adding exponents naturally."""
    out = ZERO
    for ea, ka in a.terms:
        for eb, kb in b.terms:
            out = natural_sum(out, omega_power(natural_sum(ea, eb), ka * kb))
    return out


def natural_sum_all(items: Iterable[CNF]) -> CNF:
    return functools.reduce(natural_sum, items, ZERO)


def natural_product_all(items: Iterable[CNF]) -> CNF:
    return functools.reduce(natural_product, items, ONE)


def ordinary_sum(a: CNF, b: CNF) -> CNF:
    if not b.terms:
        return a
    lead, k = b.terms[0]
    head = [(e, c) for e, c in a.terms if compare(e, lead) > 0]
    same = a.coefficient(lead)
    return CNF(head + [(lead, k + same)] + list(b.terms[1:]))


def ordinary_product(a: CNF, b: CNF) -> CNF:
    if not a.terms or not b.terms:
        return ZERO
    lead, k = a.terms[0]
    out = ZERO
    for e, m in b.terms:
        if e:
            piece = omega_power(ordinary_sum(lead, e), m)
        else:
            piece = CNF(((lead, k * m),) + a.terms[1:])
        out = ordinary_sum(out, piece)
    return out


# -- ranks -------------------------------------------------------------------

def fc_rank(a: CNF) -> CNF:
    """Least β with ``a <= ω^β``."""
    if compare(a, ONE) <= 0:
        return ZERO
    lead = a.leading_exponent
    if a.terms == ((lead, 1),):
        return lead
    return ordinary_sum(lead, ONE)


def vd_star_rank(a: CNF) -> CNF:
    """Least γ such that ``a`` is a finite sum of orderings of VD-rank <= γ.

    For an ordinal this is its leading exponent: ``a`` is the finite sum of
    its blocks ``ω^{e_i}``, each of VD-rank ``e_i``, and the bounds
    ``VD_* <= VD = FC <= VD_* + 1`` leave no smaller candidate."""
    if not a.terms:
        raise OrdinalError("VD_* rank of the empty ordering is not defined here")
    return a.leading_exponent


def is_sum_indecomposable(a: CNF) -> bool:
    """``a`` has the shape ω^γ."""
    return len(a.terms) == 1 and a.terms[0][1] == 1


def is_box_indecomposable(a: CNF) -> bool:
    """``a`` has the shape ω^(ω^γ)."""
    return is_sum_indecomposable(a) and is_sum_indecomposable(a.terms[0][0])


# -- text ----------------------------------------------------------------------

def format_cnf(a: CNF) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, k in a.terms:
        if not e:
            parts.append(str(k))
            continue
        base = "w" if e == ONE else f"w^({format_cnf(e)})"
        parts.append(base if k == 1 else f"{base}*{k}")
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*(?:(nat\+|nat\*)|(\d+)|(w)|([+*^(),]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise OrdinalSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("nat", m.group(1), start))
        elif m.group(2):
            tokens.append(("int", m.group(2), start))
        elif m.group(3):
            tokens.append(("w", "w", start))
        else:
            tokens.append(("op", m.group(4), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.toks[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            got = tok[1] or "end of input"
            raise OrdinalSyntaxError(f"expected {want!r}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> CNF:
        value = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise OrdinalSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def sum(self) -> CNF:
        value = self.prod()
        while self.peek()[1] == "+" and self.peek()[0] == "op":
            self.take("+")
            value = ordinary_sum(value, self.prod())
        return value

    def prod(self) -> CNF:
        value = self.atom()
        while self.peek()[1] == "*" and self.peek()[0] == "op":
            self.take("*")
            value = ordinary_product(value, self.atom())
        return value

    def atom(self) -> CNF:
        kind, text, pos = self.peek()
        if kind == "int":
            self.take()
            return CNF.of(int(text))
        if kind == "w":
            self.take()
            if self.peek()[1] == "^":
                self.take("^")
                return omega_power(self.atom())
            return OMEGA
        if kind == "nat":
            self.take()
            self.take("(")
            x = self.sum()
            self.take(",")
            y = self.sum()
            self.take(")")
            return natural_sum(x, y) if text == "nat+" else natural_product(x, y)
        if text == "(":
            self.take("(")
            value = self.sum()
            self.take(")")
            return value
        raise OrdinalSyntaxError(f"unexpected {text or 'end of input'!r}", pos)


def parse_ordinal(text: str) -> CNF:
    """Evaluate an ordinal expression; CNF text is a special case."""
    return _Parser(text).parse()
