"""Tree-automatic presentations of ordinals over the unary alphabet {a}.

Level 0 presents ω by paths: ``n`` is the tree with domain ``{0}^{<n}``.
Level ``k > 0`` presents ω^(ω^k) as maps ``f: ω → ω^(ω^(k-1))`` that vanish
from some point on: spine node ``0^i`` carries ``f(i)`` as the level k-1
tree hanging below ``0^i 1`` (an absent 1-child is 0), the spine stops after
the last nonzero entry, and the map reads as
``Σ_i ω^(ω^(k-1)·i) · f(i)`` with the highest index most significant.

A bottom-up automaton cannot tell whether it is on a spine or inside a
hanging subtree, so the level-k automata run every level 0..k in parallel:
the state is a tuple whose entry ``j`` is the level-j reading of the
current subtree, and level ``j`` reads its 1-child at level ``j-1``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from . import automata as ta
from .automata import ResourceError
from .logic import Presentation, PresentationError, equality_automaton, restrict_to_initial_segment
from .ordinals import CNF, ZERO, OrdinalError, compare, omega_power, ordinary_product, ordinary_sum
from .trees import BOX, Tree, convolve, deconvolve_all, path, subtree

SIGMA = ("a",)
MAX_LEVEL = 3
MAX_TRACKS = 4

LT, EQ, GT = -1, 0, 1
_EMPTY, _VALID, _DEAD = 0, 1, 2


# -- naming maps ---------------------------------------------------------------

def _check_below_tower(alpha: CNF, k: int) -> None:
    """Raise unless alpha < ω^(ω^k)."""
    if not alpha:
        return
    lead = alpha.leading_exponent
    if lead and compare(lead.leading_exponent, CNF.of(k)) >= 0:
        raise OrdinalError(f"{alpha} is not below w^(w^{k})")


def digits(alpha: CNF, k: int) -> list[CNF]:
    """The map f with ``alpha = Σ ω^(ω^(k-1)·i)·f(i)``, each ``f(i) < ω^(ω^(k-1))``,
    trimmed after the last nonzero entry."""
    if k < 1:
        raise ValueError("digits need level >= 1")
    _check_below_tower(alpha, k)
    base = CNF.of(k - 1)
    groups: dict[int, list] = {}
    for e, c in alpha.terms:
        i = e.coefficient(base)
        rest = CNF([(x, m) for x, m in e.terms if x != base])
        groups.setdefault(i, []).append((rest, c))
    n = max(groups) + 1 if groups else 0
    return [CNF(groups.get(i, [])) for i in range(n)]


def undigits(f: Sequence[CNF], k: int) -> CNF:
    out = ZERO
    for i in range(len(f) - 1, -1, -1):
        if f[i]:
            out = ordinary_sum(out, ordinary_product(omega_power(omega_power(k - 1, i) if i else ZERO), f[i]))
    return out


def encode_level(alpha: CNF | int, k: int) -> Tree:
    alpha = alpha if isinstance(alpha, CNF) else CNF.of(alpha)
    _check_below_tower(alpha, k)
    if k == 0:
        return path(int(alpha))
    labels = {}
    for i, fi in enumerate(digits(alpha, k)):
        labels["0" * i] = "a"
        for u, a in encode_level(fi, k - 1).items():
            labels["0" * i + "1" + u] = a
    return Tree(labels)


def decode_level(t: Tree, k: int) -> CNF:
    if any(a != "a" for _, a in t.items()):
        raise PresentationError("labels outside the unary alphabet")
    if k == 0:
        n = len(t)
        if t != path(n):
            raise PresentationError("not a path 0^{<n}")
        return CNF.of(n)
    n = 0
    while "0" * n in t:
        n += 1
    for u in t.nodes():
        i = len(u) - len(u.lstrip("0"))
        if not (u == "0" * i and i < n) and not u.startswith("0" * i + "1"):
            raise PresentationError(f"node {u!r} is neither on the spine nor under a 1-child")
    f = []
    for i in range(n):
        v = "0" * i + "1"
        f.append(decode_level(subtree(t, v), k - 1) if v in t else ZERO)
    if n and not f[-1]:
        raise PresentationError("last spine position carries 0")
    return undigits(f, k)


# -- automata ------------------------------------------------------------------

def _universe_step(k):
    def step(a, s0, s1):
        out = [_VALID if s1[0] == _EMPTY and s0[0] != _DEAD else _DEAD]
        for j in range(1, k + 1):
            left, right = s0[j], s1[j - 1]
            if _DEAD in (left, right):
                out.append(_DEAD)
            elif left == _EMPTY:
                out.append(_VALID if right == _VALID else _DEAD)
            else:
                out.append(_VALID)
        return tuple(out)
    return step


def universe_automaton(k: int) -> ta.TreeAutomaton:
    return ta.explore(SIGMA, (_EMPTY,) * (k + 1), _universe_step(k), lambda s: s[k] != _DEAD)


def _verdict_step(k):
    def step(pair, s0, s1):
        x, y = pair
        if s0[0] != EQ:
            v0 = s0[0]
        elif (x == BOX) == (y == BOX):
            v0 = EQ
        else:
            v0 = GT if y == BOX else LT
        out = [v0]
        for j in range(1, k + 1):
            out.append(s0[j] if s0[j] != EQ else s1[j - 1])
        return tuple(out)
    return step


def verdict_automaton(k: int):
    """Unminimized comparison automaton on 2-track convolutions together
    with its state tuples; entry ``k`` of a state is the level-k verdict."""
    return ta.explore(ta.conv_alphabet(SIGMA, 2), (EQ,) * (k + 1), _verdict_step(k),
                      lambda s: s[k] != GT, return_states=True)


def order_automaton(k: int) -> ta.TreeAutomaton:
    A, _ = verdict_automaton(k)
    return ta.minimize(A)


# -- presentations -------------------------------------------------------------

@dataclass(eq=False)
class OrdinalPresentation(Presentation):
    """A presentation of an ordinal with its naming maps.

    ``tracks == 0`` marks a plain level-``level`` tower over {a}; otherwise
    elements are convolutions of ``tracks`` level-(level-1) trees ordered
    lexicographically (first track most significant).  ``order_type`` is the
    presented ordinal."""

    level: int = 0
    tracks: int = 0
    order_type: CNF | None = None

    def encode(self, alpha: CNF | int) -> Tree:
        alpha = alpha if isinstance(alpha, CNF) else CNF.of(alpha)
        if compare(alpha, self.order_type) >= 0:
            raise PresentationError(f"{alpha} is not below the presented ordinal {self.order_type}")
        if self.tracks == 0:
            return encode_level(alpha, self.level)
        f = digits(alpha, self.level)
        f = f + [ZERO] * (self.tracks - len(f))
        return convolve([encode_level(f[self.tracks - 1 - j], self.level - 1)
                         for j in range(self.tracks)])

    def decode(self, t: Tree) -> CNF:
        if not self.contains(t):
            raise PresentationError("tree is not in the universe")
        if self.tracks == 0:
            return decode_level(t, self.level)
        parts = deconvolve_all(t, self.tracks)
        f = [decode_level(parts[self.tracks - 1 - i], self.level - 1) for i in range(self.tracks)]
        while f and not f[-1]:
            f.pop()
        return undigits(f, self.level)


def sorted_elements(P: Presentation, max_nodes: int) -> list[Tree]:
    """Universe members with at most ``max_nodes`` nodes, sorted by ``le``."""
    key = functools.cmp_to_key(lambda s, t: 0 if s == t else (-1 if P.le(s, t) else 1))
    return sorted(P.elements(max_nodes), key=key)


def tower_order_type(k: int) -> CNF:
    return omega_power(omega_power(k))


def build_omega_tower(k: int) -> OrdinalPresentation:
    """Presentation of ω^(ω^k) with relations ``le`` and ``eq``."""
    if not 0 <= k <= MAX_LEVEL:
        raise ResourceError(f"tower level {k} outside 0..{MAX_LEVEL}")
    rels = {"le": (2, order_automaton(k)), "eq": (2, equality_automaton(SIGMA))}
    return OrdinalPresentation(SIGMA, universe_automaton(k), rels, name=f"tower-{k}",
                               meta={"kind": "tower", "k": k}, level=k, tracks=0,
                               order_type=tower_order_type(k))


def _track_alphabet(n: int) -> tuple:
    return tuple(s for s in ta.conv_alphabet(SIGMA, n) if any(x != BOX for x in s))


def build_tuple_tower(k: int, n: int) -> OrdinalPresentation:
    """ω^(ω^(k-1)·n) as n-tuples of level-(k-1) elements, compared
    lexicographically with the first track most significant."""
    if not 1 <= k <= MAX_LEVEL:
        raise ResourceError(f"level {k} outside 1..{MAX_LEVEL}")
    if not 1 <= n <= MAX_TRACKS:
        raise ResourceError(f"track count {n} outside 1..{MAX_TRACKS}")
    sigma = _track_alphabet(n)
    full = ta.conv_alphabet(SIGMA, n)
    base_u = universe_automaton(k - 1)
    parts = [ta.valid_convolution_automaton(SIGMA, n)]
    for i in range(n):
        parts.append(ta.relabel(base_u, full, lambda s, i=i: None if s[i] == BOX else s[i]))
    universe = ta.relabel(ta.intersect(*parts), sigma, lambda s: s)

    V, states = verdict_automaton(k - 1)
    pair_alpha = ta.conv_alphabet(sigma, 2)

    def track_pair(p, i):
        x = BOX if p[0] == BOX else p[0][i]
        y = BOX if p[1] == BOX else p[1][i]
        return None if x == BOX and y == BOX else (x, y)

    per_track = [ta.relabel(V, pair_alpha, lambda p, i=i: track_pair(p, i), minimal=False)
                 for i in range(n)]

    def lex_le(qs):
        for q in qs:
            v = states[q][k - 1]
            if v != EQ:
                return v == LT
        return True

    le = ta.product_many(per_track, lex_le)
    rels = {"le": (2, le), "eq": (2, equality_automaton(sigma))}
    return OrdinalPresentation(sigma, universe, rels, name=f"tuples-{k}-{n}",
                               meta={"kind": "tuples", "k": k, "tracks": n},
                               level=k, tracks=n,
                               order_type=omega_power(omega_power(k - 1, n)))


def _track_count(alpha: CNF, k: int) -> tuple[int, bool]:
    """Minimal n >= 1 with alpha <= ω^(ω^(k-1)·n), and whether equality holds."""
    if not alpha:
        return 1, False
    lead = alpha.leading_exponent
    i = lead.coefficient(CNF.of(k - 1))
    exact = (len(alpha.terms) == 1 and alpha.terms[0][1] == 1
             and lead == omega_power(k - 1, i) and i >= 1)
    return (i, True) if exact else (i + 1, False)


def build_rank_bounded(alpha: CNF | int, k: int) -> OrdinalPresentation:
    """Presentation of ``alpha < ω^(ω^k)`` whose domain tree has CB_* rank <= k."""
    alpha = alpha if isinstance(alpha, CNF) else CNF.of(alpha)
    if not 1 <= k <= MAX_LEVEL:
        raise ResourceError(f"level {k} outside 1..{MAX_LEVEL}")
    try:
        _check_below_tower(alpha, k)
    except OrdinalError as exc:
        raise PresentationError(str(exc)) from exc
    n, exact = _track_count(alpha, k)
    full = build_tuple_tower(k, n)
    meta = {"kind": "rank-bounded", "k": k, "alpha": str(alpha)}
    if exact:
        full.meta = meta
        full.name = f"rank-bounded-{k}"
        return full
    bound = full.encode(alpha)
    cut = restrict_to_initial_segment(full, bound)
    return OrdinalPresentation(cut.alphabet, cut.universe, cut.relations,
                               name=f"rank-bounded-{k}", meta=meta, normalize=False,
                               level=k, tracks=n, order_type=alpha)


def presentation_from_meta(meta: dict) -> OrdinalPresentation:
    from .ordinals import parse_ordinal
    kind = meta.get("kind")
    if kind == "tower":
        return build_omega_tower(int(meta["k"]))
    if kind == "tuples":
        return build_tuple_tower(int(meta["k"]), int(meta["tracks"]))
    if kind == "rank-bounded":
        return build_rank_bounded(parse_ordinal(meta["alpha"]), int(meta["k"]))
    raise PresentationError(f"unknown presentation kind {kind!r}")
