"""Deterministic bottom-up tree automata and word DFAs over {0,1}.

A :class:`TreeAutomaton` is always complete: its transition table is a numpy
array ``delta[a, q0, q1]`` covering every symbol index and state pair.  All
constructions return trimmed (only realizable states), minimized automata
with a deterministic state numbering.
"""

from __future__ import annotations

import itertools
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .trees import (BOX, EMPTY, Symbol, Tree, TreeError, all_domains, boundary,
                    format_symbol, node_key, parse_symbol)


class ResourceError(ValueError):
    """Requested construction exceeds a documented size cap."""


# largest transition table (symbols × states²) a product or exploration may build
MAX_TABLE_CELLS = 1 << 25


def _check_table(symbols: int, states: int) -> None:
    if symbols * states * states > MAX_TABLE_CELLS:
        raise ResourceError(f"automaton with {states} states over {symbols} symbols exceeds "
                            f"the table limit of {MAX_TABLE_CELLS} cells")


class AutomatonError(ValueError):
    """Malformed automaton, alphabet mismatch or unsupported arity."""


class TreeAutomaton:
    """Complete deterministic bottom-up tree automaton ``(Q, ι, δ, F)``."""

    def __init__(self, alphabet: Sequence[Symbol], delta, start: int, accept):
        self.alphabet = tuple(alphabet)
        self.index = {a: i for i, a in enumerate(self.alphabet)}
        if len(self.index) != len(self.alphabet):
            raise AutomatonError("duplicate symbols in alphabet")
        delta = np.asarray(delta, dtype=np.int64)
        n = delta.shape[1] if delta.ndim == 3 else 0
        if delta.shape != (len(self.alphabet), n, n):
            raise AutomatonError(f"transition table shape {delta.shape} does not match "
                                 f"{len(self.alphabet)} symbols")
        if n == 0:
            raise AutomatonError("automaton needs at least one state")
        if delta.size and (delta.min() < 0 or delta.max() >= n):
            raise AutomatonError("transition target out of range")
        if not 0 <= start < n:
            raise AutomatonError("start state out of range")
        acc = np.zeros(n, dtype=bool)
        accept = np.asarray(accept)
        if accept.dtype == bool and accept.shape == (n,):
            acc[:] = accept
        else:
            acc[list(int(q) for q in accept.ravel())] = True
        delta.setflags(write=False)
        acc.setflags(write=False)
        self.delta = delta
        self.start = int(start)
        self.accept = acc
        self._realizable = None
        self._nonempty = None

    @property
    def num_states(self) -> int:
        return self.delta.shape[1]

    def __repr__(self) -> str:
        return (f"TreeAutomaton(|Σ|={len(self.alphabet)}, states={self.num_states}, "
                f"accepting={int(self.accept.sum())})")

    def step(self, a: Symbol, q0: int, q1: int) -> int:
        return int(self.delta[self.index[a], q0, q1])

    # realizability is cached: automata are immutable
    def realizable(self) -> np.ndarray:
        """Boolean mask of states reached by some tree (the empty tree gives ι)."""
        if self._realizable is None:
            self._realizable, self._nonempty = _realizable(self.delta, self.start)
        return self._realizable

    def nonempty_realizable(self) -> np.ndarray:
        if self._nonempty is None:
            self.realizable()
        return self._nonempty

    def __eq__(self, other):
        if not isinstance(other, TreeAutomaton):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.start == other.start
                and np.array_equal(self.delta, other.delta)
                and np.array_equal(self.accept, other.accept))

    __hash__ = object.__hash__


def _realizable(delta: np.ndarray, start: int) -> tuple[np.ndarray, np.ndarray]:
    n = delta.shape[1]
    reach = np.zeros(n, dtype=bool)
    reach[start] = True
    nonempty = np.zeros(n, dtype=bool)
    while True:
        idx = np.flatnonzero(reach)
        hit = np.zeros(n, dtype=bool)
        hit[np.unique(delta[:, idx[:, None], idx[None, :]])] = True
        if np.array_equal(hit | nonempty, nonempty):
            break
        nonempty |= hit
        reach |= hit
    return reach, nonempty


# -- runs --------------------------------------------------------------------

def run(A: TreeAutomaton, t: Tree, u: str = "", rho: dict[str, int] | None = None) -> int:
    """The state ``A(t, u, ρ)``: δ inside the domain, ρ on assigned boundary
    nodes, ι on the remaining boundary nodes."""
    rho = rho or {}
    bnd = t.boundary()
    for v in rho:
        if v not in bnd:
            raise TreeError(f"boundary assignment at {v!r}, which is not in ∂dom(t)")
    if u not in t and u not in bnd:
        raise TreeError(f"node {u!r} outside dom(t) ∪ ∂dom(t)")
    if u not in t:
        return rho.get(u, A.start)
    value: dict[str, int] = {}
    nodes = [v for v in t.nodes() if v.startswith(u)]
    for v in reversed(nodes):
        a = t[v]
        if a not in A.index:
            raise AutomatonError(f"symbol {format_symbol(a)!r} not in the automaton alphabet")
        kids = []
        for d in "01":
            w = v + d
            if w in value:
                kids.append(value[w])
            else:
                kids.append(rho.get(w, A.start))
        value[v] = int(A.delta[A.index[a], kids[0], kids[1]])
    return value[u]


def accepts(A: TreeAutomaton, t: Tree) -> bool:
    return bool(A.accept[run(A, t)])


# -- builders ----------------------------------------------------------------

def explore(alphabet: Sequence[Symbol], start: Hashable,
            step: Callable[[Symbol, Hashable, Hashable], Hashable],
            accepting: Callable[[Hashable], bool], minimal: bool = True,
            return_states: bool = False):
    """Build an automaton from a state-transition function by exploring the
    states reachable from ``start``.  States may be any hashable values.

    With ``return_states`` the unminimized automaton is returned together
    with the list of state objects (state ``i`` is ``states[i]``)."""
    alphabet = tuple(alphabet)
    states = [start]
    index = {start: 0}
    table: dict[tuple[int, int, int], int] = {}

    def target(ai, p, q):
        s = step(alphabet[ai], states[p], states[q])
        j = index.get(s)
        if j is None:
            j = index[s] = len(states)
            states.append(s)
        table[ai, p, q] = j

    j = 0
    while j < len(states):
        _check_table(len(alphabet), j + 1)
        for r in range(j + 1):
            for ai in range(len(alphabet)):
                target(ai, j, r)
                if r != j:
                    target(ai, r, j)
        j += 1
    n = len(states)
    delta = np.zeros((len(alphabet), n, n), dtype=np.int64)
    for (ai, p, q), s in table.items():
        delta[ai, p, q] = s
    A = TreeAutomaton(alphabet, delta, 0, [bool(accepting(s)) for s in states])
    if return_states:
        return A, states
    return minimize(A) if minimal else A


def product_many(automata: Sequence[TreeAutomaton],
                 accepting: Callable[[tuple[int, ...]], bool],
                 minimal: bool = True) -> TreeAutomaton:
    """Synchronous product of automata over one alphabet; ``accepting`` gets
    the tuple of component states."""
    if not automata:
        raise AutomatonError("product of zero automata")
    alphabet = automata[0].alphabet
    for B in automata[1:]:
        if B.alphabet != alphabet:
            raise AutomatonError("product of automata over different alphabets")
    sizes = [B.num_states for B in automata]
    radix = np.cumprod([1] + sizes[::-1][:-1])[::-1].astype(np.int64)

    def decode(codes):
        return [(codes // radix[k]) % sizes[k] for k in range(len(sizes))]

    start_code = int(sum(B.start * radix[k] for k, B in enumerate(automata)))
    codes = np.array([start_code], dtype=np.int64)
    while True:
        _check_table(len(alphabet), len(codes))
        comps = decode(codes)
        out = np.zeros((len(alphabet), len(codes), len(codes)), dtype=np.int64)
        for k, B in enumerate(automata):
            out += B.delta[:, comps[k][:, None], comps[k][None, :]] * radix[k]
        new = np.setdiff1d(np.unique(out), codes)
        if new.size == 0:
            break
        codes = np.concatenate([codes, new])
    sorter = np.argsort(codes)
    delta = sorter[np.searchsorted(codes, out, sorter=sorter)]
    comps = decode(codes)
    acc = [bool(accepting(tuple(int(c[i]) for c in comps))) for i in range(len(codes))]
    A = TreeAutomaton(alphabet, delta, 0, acc)
    return minimize(A) if minimal else A


LAWS: dict[str, Callable[[bool, bool], bool]] = {
    "and": lambda x, y: x and y,
    "or": lambda x, y: x or y,
    "xor": lambda x, y: x != y,
    "diff": lambda x, y: x and not y,
    "iff": lambda x, y: x == y,
}


def product(A: TreeAutomaton, B: TreeAutomaton,
            law: str | Callable[[bool, bool], bool] = "and") -> TreeAutomaton:
    """Recognizes ``{t : law(t ∈ L(A), t ∈ L(B))}``."""
    f = LAWS[law] if isinstance(law, str) else law
    return product_many([A, B], lambda qs: f(bool(A.accept[qs[0]]), bool(B.accept[qs[1]])))


def intersect(*automata: TreeAutomaton) -> TreeAutomaton:
    return product_many(automata, lambda qs: all(B.accept[q] for B, q in zip(automata, qs)))


def union(*automata: TreeAutomaton) -> TreeAutomaton:
    return product_many(automata, lambda qs: any(B.accept[q] for B, q in zip(automata, qs)))


def complement(A: TreeAutomaton) -> TreeAutomaton:
    return TreeAutomaton(A.alphabet, A.delta, A.start, ~A.accept)


def with_accepting(A: TreeAutomaton, accept) -> TreeAutomaton:
    return TreeAutomaton(A.alphabet, A.delta, A.start, accept)


def relabel(A: TreeAutomaton, alphabet: Sequence[Symbol],
            h: Callable[[Symbol], Symbol | None], minimal: bool = True) -> TreeAutomaton:
    """Inverse image under a letter map.  A new symbol mapped to ``None`` sends
    any node carrying it to ι, i.e. the node is treated as outside the tree;
    this is sound whenever such nodes only head subtrees invisible to ``A``."""
    alphabet = tuple(alphabet)
    n = A.num_states
    delta = np.empty((len(alphabet), n, n), dtype=np.int64)
    for i, b in enumerate(alphabet):
        a = h(b)
        if a is None:
            delta[i] = A.start
        elif a not in A.index:
            raise AutomatonError(f"letter map sends {format_symbol(b)} outside the alphabet")
        else:
            delta[i] = A.delta[A.index[a]]
    B = TreeAutomaton(alphabet, delta, A.start, A.accept)
    return minimize(B) if minimal else B


def trim(A: TreeAutomaton) -> TreeAutomaton:
    keep = np.flatnonzero(A.realizable())
    remap = np.full(A.num_states, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    delta = remap[A.delta[:, keep[:, None], keep[None, :]]]
    return TreeAutomaton(A.alphabet, delta, int(remap[A.start]), A.accept[keep])


def _row_classes(sig: np.ndarray) -> np.ndarray:
    """Class ids of identical rows, numbered by first appearance."""
    sig = np.ascontiguousarray(sig)
    ids: dict[bytes, int] = {}
    return np.fromiter((ids.setdefault(row.tobytes(), len(ids)) for row in sig),
                       dtype=np.int64, count=len(sig))


def minimize(A: TreeAutomaton) -> TreeAutomaton:
    """Trim, then merge states by congruence refinement (Moore-style): two
    states are merged when no context over the alphabet separates them."""
    A = trim(A)
    n = A.num_states
    dtype = np.int32 if n < 2**31 else np.int64
    cls = _row_classes(A.accept.astype(np.int64)[:, None])
    count = cls.max() + 1
    while True:
        img = cls.astype(dtype)[A.delta]        # (S, n, n)
        left = img.transpose(1, 0, 2).reshape(n, -1)
        right = img.transpose(2, 0, 1).reshape(n, -1)
        new = _row_classes(np.hstack([cls.astype(dtype)[:, None], left, right]))
        if new.max() + 1 == count:
            break
        cls, count = new, new.max() + 1
    rep = np.zeros(count, dtype=np.int64)
    rep[cls[::-1]] = np.arange(n)[::-1]        # first state of each class
    delta = cls[A.delta[:, rep[:, None], rep[None, :]]]
    B = TreeAutomaton(A.alphabet, delta, int(cls[A.start]), A.accept[rep])
    return canonical_numbering(B)


def canonical_numbering(A: TreeAutomaton) -> TreeAutomaton:
    """Renumber states in discovery order from ι (deterministic, so
    isomorphic automata get identical tables)."""
    n = A.num_states
    order = np.array([A.start], dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[A.start] = True
    while True:
        vals = A.delta[:, order[:, None], order[None, :]].ravel()
        vals = vals[~seen[vals]]
        if vals.size == 0:
            break
        _, first = np.unique(vals, return_index=True)
        new = vals[np.sort(first)]
        seen[new] = True
        order = np.concatenate([order, new])
    if len(order) != n:
        raise AutomatonError("canonical numbering on untrimmed automaton")
    perm = np.empty(n, dtype=np.int64)
    perm[order] = np.arange(n)
    delta = perm[A.delta[:, order[:, None], order[None, :]]]
    return TreeAutomaton(A.alphabet, delta, 0, A.accept[order])


# -- decision procedures -----------------------------------------------------

def is_empty(A: TreeAutomaton) -> bool:
    return not bool((A.realizable() & A.accept).any())


def language_equivalent(A: TreeAutomaton, B: TreeAutomaton) -> bool:
    return is_empty(product(A, B, "xor"))


def is_subset(A: TreeAutomaton, B: TreeAutomaton) -> bool:
    return is_empty(product(A, B, "diff"))


def is_infinite(A: TreeAutomaton) -> bool:
    """L(A) is infinite iff T(L(A)) is (the alphabet is finite)."""
    return not tree_language_domain(A).is_finite()


def enumerate_trees(A: TreeAutomaton, max_nodes: int) -> list[Tree]:
    """All accepted trees with at most ``max_nodes`` nodes, in canonical order
    (size, then canonical domain, then labels by alphabet position)."""
    if max_nodes < 0:
        raise ValueError("max_nodes must be non-negative")
    useful = _useful(A)
    if not useful.any():
        return []
    by_size: list[dict[int, list[Tree]]] = [{A.start: [EMPTY]}]
    for size in range(1, max_nodes + 1):
        layer: dict[int, list[Tree]] = {}
        for s0 in range(size):
            s1 = size - 1 - s0
            for q0, ts0 in by_size[s0].items():
                for q1, ts1 in by_size[s1].items():
                    for ai, a in enumerate(A.alphabet):
                        q = int(A.delta[ai, q0, q1])
                        if not useful[q]:
                            continue
                        bucket = layer.setdefault(q, [])
                        for x in ts0:
                            for y in ts1:
                                lab = {"": a}
                                lab.update(("0" + u, b) for u, b in x.items())
                                lab.update(("1" + u, b) for u, b in y.items())
                                bucket.append(Tree(lab))
        by_size.append(layer)
    out = [t for layer in by_size for q, ts in layer.items() if A.accept[q] for t in ts]
    return sorted(out, key=lambda t: tree_order_key(t, A.index))


def tree_order_key(t: Tree, index: dict) -> tuple:
    items = t.items()
    return (len(items), tuple(node_key(u) for u, _ in items),
            tuple(index.get(a, -1) for _, a in items))


def _useful(A: TreeAutomaton) -> np.ndarray:
    """States that occur in the run of some accepted tree."""
    reach = A.realizable()
    idx = np.flatnonzero(reach)
    useful = A.accept & reach
    while True:
        new = useful.copy()
        u = np.flatnonzero(useful)
        sub = A.delta[:, idx[:, None], idx[None, :]]    # (S, r, r)
        hit = np.isin(sub, u)
        new[idx[hit.any(axis=(0, 2))]] = True
        new[idx[hit.any(axis=(0, 1))]] = True
        if np.array_equal(new, useful):
            return useful
        useful = new


def all_trees(alphabet: Sequence[Symbol], max_nodes: int) -> list[Tree]:
    """Brute-force list of every tree with at most ``max_nodes`` nodes."""
    out = []
    for dom in all_domains(max_nodes):
        nodes = sorted(dom, key=node_key)
        for labs in itertools.product(alphabet, repeat=len(nodes)):
            out.append(Tree(dict(zip(nodes, labs))))
    return out


# -- convolution alphabets ---------------------------------------------------

def conv_alphabet(sigma: Sequence[Symbol], n: int) -> tuple[tuple, ...]:
    """Σ_□^n in product order, including the all-□ tuple."""
    if n < 1:
        raise AutomatonError("convolution arity must be >= 1")
    return tuple(itertools.product(tuple(sigma) + (BOX,), repeat=n))


def valid_convolution_automaton(sigma: Sequence[Symbol], n: int) -> TreeAutomaton:
    """Accepts exactly the convolutions of n Σ-trees."""
    def step(a, s0, s1):
        if s0 == "dead" or s1 == "dead":
            return "dead"
        present = tuple(x != BOX for x in a)
        if not any(present):
            return "dead"
        for i in range(n):
            if not present[i] and (s0[i] or s1[i]):
                return "dead"
        return present
    return explore(conv_alphabet(sigma, n), (False,) * n, step, lambda s: s != "dead")


def universal_automaton(alphabet: Sequence[Symbol]) -> TreeAutomaton:
    a = tuple(alphabet)
    return TreeAutomaton(a, np.zeros((len(a), 1, 1), dtype=np.int64), 0, [True])


def empty_automaton(alphabet: Sequence[Symbol]) -> TreeAutomaton:
    a = tuple(alphabet)
    return TreeAutomaton(a, np.zeros((len(a), 1, 1), dtype=np.int64), 0, [False])


def singleton_automaton(alphabet: Sequence[Symbol], s: Tree) -> TreeAutomaton:
    """Accepts exactly the tree ``s``.  The state of a subtree is the set of
    positions of ``dom(s) ∪ ∂dom(s)`` at which it would fit."""
    positions = sorted(set(s.labels) | s.boundary(), key=node_key)
    empty_fits = frozenset(p for p in positions if p not in s)

    def step(a, f0, f1):
        return frozenset(p for p in s.labels if s[p] == a
                         and p + "0" in f0 and p + "1" in f1)

    return explore(alphabet, empty_fits, step, lambda f: "" in f)


def drop_track(symbol: tuple, i: int) -> tuple:
    return symbol[:i] + symbol[i + 1:]


def project(A: TreeAutomaton, sigma: Sequence[Symbol], n: int, i: int) -> TreeAutomaton:
    """Existentially quantify track ``i`` of an automaton over Σ_□^n.

    The removed track is guessed nondeterministically, including regions
    where it reaches beyond the remaining tracks (those regions are absent
    from the projected tree, so they are summarized in the start subset).
    The subset construction is applied eagerly and the result intersected
    with the valid-convolution automaton over n-1 tracks."""
    if n < 2:
        raise AutomatonError("projection needs arity >= 2")
    if A.alphabet != conv_alphabet(sigma, n):
        raise AutomatonError("automaton alphabet is not Σ_□^n")
    A = intersect(A, valid_convolution_automaton(sigma, n))
    choices = tuple(sigma) + (BOX,)
    new_alpha = conv_alphabet(sigma, n - 1)
    guess = {}
    for b in new_alpha:
        if all(x == BOX for x in b):
            guess[b] = []
        else:
            guess[b] = [A.index[b[:i] + (x,) + b[i:]] for x in choices]
    only_i = [A.index[(BOX,) * i + (x,) + (BOX,) * (n - 1 - i)] for x in sigma]
    reach = np.zeros(A.num_states, dtype=bool)
    reach[A.start] = True
    while True:
        idx = np.flatnonzero(reach)
        hit = np.unique(A.delta[only_i][:, idx[:, None], idx[None, :]])
        new = reach.copy()
        new[hit] = True
        if np.array_equal(new, reach):
            break
        reach = new
    start = tuple(np.flatnonzero(reach).tolist())
    delta = A.delta

    def step(b, S0, S1):
        ids = guess[b]
        if not ids or not S0 or not S1:
            return ()
        sub = delta[ids][:, list(S0)][:, :, list(S1)]
        return tuple(np.unique(sub).tolist())

    acc = A.accept
    P = explore(new_alpha, start, step, lambda S: bool(acc[list(S)].any()) if S else False)
    return intersect(P, valid_convolution_automaton(sigma, n - 1))


# -- word DFAs and T(L) ------------------------------------------------------

class WordDFA:
    """Complete DFA over {0,1}; ``delta[q, d]`` is the successor on bit ``d``."""

    def __init__(self, delta, start: int, accept):
        delta = np.asarray(delta, dtype=np.int64)
        if delta.ndim != 2 or delta.shape[1] != 2 or delta.shape[0] == 0:
            raise AutomatonError("word DFA transition table must have shape (n, 2)")
        n = delta.shape[0]
        if delta.min() < 0 or delta.max() >= n or not 0 <= start < n:
            raise AutomatonError("word DFA state out of range")
        acc = np.zeros(n, dtype=bool)
        accept = np.asarray(accept)
        if accept.dtype == bool and accept.shape == (n,):
            acc[:] = accept
        else:
            acc[list(int(q) for q in accept.ravel())] = True
        delta.setflags(write=False)
        acc.setflags(write=False)
        self.delta = delta
        self.start = int(start)
        self.accept = acc

    @property
    def num_states(self) -> int:
        return self.delta.shape[0]

    def __repr__(self) -> str:
        return f"WordDFA(states={self.num_states}, accepting={int(self.accept.sum())})"

    def state_of(self, word: str) -> int:
        q = self.start
        for c in word:
            q = int(self.delta[q, int(c)])
        return q

    def accepts(self, word: str) -> bool:
        return bool(self.accept[self.state_of(word)])

    def words(self, max_len: int) -> list[str]:
        """Accepted words of length <= max_len in canonical order."""
        out = []
        for n in range(max_len + 1):
            for bits in itertools.product("01", repeat=n):
                w = "".join(bits)
                if self.accepts(w):
                    out.append(w)
        return out

    def reachable(self) -> np.ndarray:
        seen = np.zeros(self.num_states, dtype=bool)
        stack = [self.start]
        seen[self.start] = True
        while stack:
            q = stack.pop()
            for d in (0, 1):
                r = int(self.delta[q, d])
                if not seen[r]:
                    seen[r] = True
                    stack.append(r)
        return seen

    def productive(self) -> np.ndarray:
        """States from which some accepting state is reachable."""
        good = self.accept.copy()
        while True:
            new = good | good[self.delta].any(axis=1)
            if np.array_equal(new, good):
                return good
            good = new

    def is_empty(self) -> bool:
        return not (self.reachable() & self.accept).any()

    def is_finite(self) -> bool:
        """No cycle among states that are both reachable and productive."""
        live = self.reachable() & self.productive()
        # peel off live states without live successors until nothing changes
        alive = live.copy()
        while True:
            has_succ = np.zeros(self.num_states, dtype=bool)
            for d in (0, 1):
                has_succ |= alive[self.delta[:, d]]
            new = alive & has_succ
            if np.array_equal(new, alive):
                return not alive.any()
            alive = new

    def is_prefix_closed(self) -> bool:
        """Every accepted word's prefixes are accepted: no step from a
        reachable rejecting state leads to a productive state."""
        reach = self.reachable()
        prod = self.productive()
        bad = reach & ~self.accept
        return not prod[self.delta[bad]].any()

    def with_accepting(self, accept) -> "WordDFA":
        return WordDFA(self.delta, self.start, accept)

    def with_start(self, start: int) -> "WordDFA":
        return WordDFA(self.delta, start, self.accept)

    def minimize(self) -> "WordDFA":
        reach = np.flatnonzero(self.reachable())
        remap = np.full(self.num_states, -1, dtype=np.int64)
        remap[reach] = np.arange(len(reach))
        delta = remap[self.delta[reach]]
        acc = self.accept[reach]
        cls = acc.astype(np.int64)
        count = len(np.unique(cls))
        while True:
            sig = np.column_stack([cls, cls[delta[:, 0]], cls[delta[:, 1]]])
            _, new = np.unique(sig, axis=0, return_inverse=True)
            new = new.ravel()
            if new.max() + 1 == count:
                break
            cls, count = new, new.max() + 1
        _, cls = np.unique(cls, return_inverse=True)
        cls = cls.ravel()
        count = cls.max() + 1
        rep = np.zeros(count, dtype=np.int64)
        rep[cls[::-1]] = np.arange(len(cls))[::-1]
        D = WordDFA(cls[delta[rep]], int(cls[remap[self.start]]), acc[rep])
        return D._canonical()

    def _canonical(self) -> "WordDFA":
        order = [self.start]
        seen = {self.start}
        j = 0
        while j < len(order):
            for d in (0, 1):
                r = int(self.delta[order[j], d])
                if r not in seen:
                    seen.add(r)
                    order.append(r)
            j += 1
        perm = np.full(self.num_states, -1, dtype=np.int64)
        perm[order] = np.arange(len(order))
        order = np.array(order)
        return WordDFA(perm[self.delta[order]], 0, self.accept[order])


def word_dfa_from_sets(start: frozenset, step: Callable[[Hashable, int], Hashable],
                       accepting: Callable[[Hashable], bool]) -> WordDFA:
    states = [start]
    index = {start: 0}
    rows = []
    j = 0
    while j < len(states):
        row = []
        for d in (0, 1):
            s = step(states[j], d)
            if s not in index:
                index[s] = len(states)
                states.append(s)
            row.append(index[s])
        rows.append(row)
        j += 1
    return WordDFA(rows, 0, [accepting(s) for s in states])


def tree_language_domain(A: TreeAutomaton) -> WordDFA:
    """Word DFA for ``T(L(A))``, the union of the domains of accepted trees.

    Top-down guessing over automaton states: from a state q at node u, step
    on bit d to q_d whenever some symbol and realizable sibling value give
    ``δ(a, q0, q1) = q``.  A word is accepted when some run ends in a state
    that a nonempty tree realizes."""
    real = A.realizable()
    nonempty = A.nonempty_realizable()
    n = A.num_states
    # M[d][q, p]: from q, bit d may lead to child state p
    M = [np.zeros((n, n), dtype=bool) for _ in (0, 1)]
    ridx = np.flatnonzero(real)
    for ai in range(len(A.alphabet)):
        sub = A.delta[ai][np.ix_(ridx, ridx)]
        M[0][sub, np.broadcast_to(ridx[:, None], sub.shape)] = True
        M[1][sub, np.broadcast_to(ridx[None, :], sub.shape)] = True
    start = frozenset(np.flatnonzero(A.accept & real).tolist())

    def step(S, d):
        if not S:
            return S
        return frozenset(np.flatnonzero(M[d][list(S)].any(axis=0)).tolist())

    D = word_dfa_from_sets(start, step, lambda S: bool(nonempty[list(S)].any()) if S else False)
    return D.minimize()


def word_dfa_from_language(words: Iterable[str]) -> WordDFA:
    """DFA for a finite set of words (a trie plus a sink)."""
    words = set(words)
    prefixes = {w[:i] for w in words for i in range(len(w) + 1)}
    nodes = sorted(prefixes, key=node_key)
    index = {w: i for i, w in enumerate(nodes)}
    sink = len(nodes)
    rows = [[index.get(w + d, sink) for d in "01"] for w in nodes] + [[sink, sink]]
    acc = [w in words for w in nodes] + [False]
    if not nodes:
        return WordDFA([[0, 0]], 0, [False])
    return WordDFA(rows, index[""], acc).minimize()


# -- text formats ------------------------------------------------------------

def dumps(A: TreeAutomaton) -> str:
    lines = ["alphabet: " + " ".join(format_symbol(a) for a in A.alphabet),
             f"states: {A.num_states}",
             f"start: {A.start}"]
    for ai, a in enumerate(A.alphabet):
        sa = format_symbol(a)
        for q0 in range(A.num_states):
            for q1 in range(A.num_states):
                lines.append(f"{sa} {q0} {q1} -> {A.delta[ai, q0, q1]}")
    lines.append("accept: " + " ".join(str(q) for q in np.flatnonzero(A.accept)))
    return "\n".join(lines) + "\n"


def _header(lines, lineno, key):
    if lineno >= len(lines) or not lines[lineno].startswith(key + ":"):
        raise AutomatonError(f"line {lineno + 1}: expected '{key}:'")
    return lines[lineno][len(key) + 1:].strip()


def loads(text: str) -> TreeAutomaton:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        alphabet = [parse_symbol(s) for s in _header(lines, 0, "alphabet").split()]
        n = int(_header(lines, 1, "states"))
        start = int(_header(lines, 2, "start"))
    except (TreeError, ValueError) as exc:
        raise AutomatonError(str(exc)) from exc
    index = {a: i for i, a in enumerate(alphabet)}
    delta = np.full((len(alphabet), n, n), -1, dtype=np.int64)
    accept = None
    for lineno, line in enumerate(lines[3:], 4):
        if line.startswith("accept:"):
            accept = [int(x) for x in line[7:].split()]
            continue
        parts = line.split()
        if len(parts) != 5 or parts[3] != "->":
            raise AutomatonError(f"line {lineno}: expected 'a q0 q1 -> q'")
        a = parse_symbol(parts[0])
        if a not in index:
            raise AutomatonError(f"line {lineno}: unknown symbol {parts[0]!r}")
        delta[index[a], int(parts[1]), int(parts[2])] = int(parts[4])
    if accept is None:
        raise AutomatonError("missing 'accept:' line")
    if (delta < 0).any():
        raise AutomatonError("transition table incomplete")
    return TreeAutomaton(alphabet, delta, start, accept)


def dumps_word(D: WordDFA) -> str:
    lines = ["alphabet: 0 1", f"states: {D.num_states}", f"start: {D.start}"]
    for q in range(D.num_states):
        for d in (0, 1):
            lines.append(f"{q} {d} -> {D.delta[q, d]}")
    lines.append("accept: " + " ".join(str(q) for q in np.flatnonzero(D.accept)))
    return "\n".join(lines) + "\n"


def loads_word(text: str) -> WordDFA:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if _header(lines, 0, "alphabet").split() != ["0", "1"]:
        raise AutomatonError("word DFA alphabet must be '0 1'")
    n = int(_header(lines, 1, "states"))
    start = int(_header(lines, 2, "start"))
    delta = np.full((n, 2), -1, dtype=np.int64)
    accept = None
    for lineno, line in enumerate(lines[3:], 4):
        if line.startswith("accept:"):
            accept = [int(x) for x in line[7:].split()]
            continue
        parts = line.split()
        if len(parts) != 4 or parts[2] != "->" or parts[1] not in ("0", "1"):
            raise AutomatonError(f"line {lineno}: expected 'q d -> q'")
        delta[int(parts[0]), int(parts[1])] = int(parts[3])
    if accept is None:
        raise AutomatonError("missing 'accept:' line")
    if (delta < 0).any():
        raise AutomatonError("transition table incomplete")
    return WordDFA(delta, start, accept)
