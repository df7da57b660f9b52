"""Cantor-Bendixson style ranks of regular binary trees, plus finite
condensation on explicit finite orderings.

A regular binary tree is a prefix-closed regular language over {0,1}, held
as a :class:`~treeord.automata.WordDFA`.  Whether a node belongs to a
derivative depends only on the DFA state it reaches, so derivatives keep the
transition table and only recompute the accepting set.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import automata as ta
from .automata import ResourceError, WordDFA

MAX_ANTICHAIN_DEPTH = 10


class NotT2Free(ValueError):
    """The derivative sequence stabilises at an infinite tree."""

    def __init__(self, witness: "RegularBinaryTree"):
        super().__init__("tree is not T2-free: the derivative fixpoint is infinite "
                         f"(e.g. contains {witness.sample_words(4)[:6]})")
        self.witness = witness


class RegularBinaryTree:
    """A regular prefix-closed set of nodes."""

    def __init__(self, dfa: WordDFA):
        if not dfa.is_prefix_closed():
            raise ValueError("word DFA does not accept a prefix-closed language")
        self.dfa = dfa

    # constructors
    @classmethod
    def from_presentation(cls, P) -> "RegularBinaryTree":
        """T(L) for the universe of a presentation."""
        return cls(ta.tree_language_domain(P.universe))

    @classmethod
    def from_automaton(cls, A: ta.TreeAutomaton) -> "RegularBinaryTree":
        return cls(ta.tree_language_domain(A))

    @classmethod
    def from_words(cls, words) -> "RegularBinaryTree":
        return cls(ta.word_dfa_from_language(words))

    @classmethod
    def full(cls) -> "RegularBinaryTree":
        """{0,1}*."""
        return cls(WordDFA([[0, 0]], 0, [True]))

    @classmethod
    def spine(cls) -> "RegularBinaryTree":
        """0*."""
        return cls(WordDFA([[0, 1], [1, 1]], 0, [True, False]))

    @classmethod
    def comb(cls) -> "RegularBinaryTree":
        """0* ∪ 0*10*."""
        return cls(WordDFA([[0, 1], [1, 2], [2, 2]], 0, [True, True, False]))

    # queries
    def __contains__(self, word: str) -> bool:
        return self.dfa.accepts(word)

    def is_empty(self) -> bool:
        return not self.dfa.accept[self.dfa.start]

    def is_finite(self) -> bool:
        return self.dfa.is_finite()

    def sample_words(self, max_len: int) -> list[str]:
        return self.dfa.words(max_len)

    def subtree(self, u: str) -> "RegularBinaryTree":
        """T↾u = {v : uv ∈ T}."""
        return RegularBinaryTree(self.dfa.with_start(self.dfa.state_of(u)))

    def equivalent(self, other: "RegularBinaryTree", depth: int | None = None) -> bool:
        if depth is not None:
            return self.sample_words(depth) == other.sample_words(depth)
        a, b = self.dfa.minimize(), other.dfa.minimize()
        return (np.array_equal(a.delta, b.delta) and np.array_equal(a.accept, b.accept))

    def __repr__(self):
        return f"RegularBinaryTree({self.dfa!r})"


def infinite_states(dfa: WordDFA, accept: np.ndarray | None = None) -> np.ndarray:
    """States q in ``accept`` from which an infinite path stays in ``accept``."""
    acc = dfa.accept if accept is None else accept
    live = acc.copy()
    while True:
        new = live & live[dfa.delta].any(axis=1)
        if np.array_equal(new, live):
            return live
        live = new


def _derivative_accept(dfa: WordDFA, acc: np.ndarray) -> np.ndarray:
    inf = infinite_states(dfa, acc)
    branching = acc & inf[dfa.delta[:, 0]] & inf[dfa.delta[:, 1]]
    keep = branching.copy()
    while True:
        new = keep | (acc & keep[dfa.delta].any(axis=1))
        if np.array_equal(new, keep):
            return keep
        keep = new


def derivative(T: RegularBinaryTree) -> RegularBinaryTree:
    """d(T): nodes lying on at least two distinct infinite branches."""
    return RegularBinaryTree(T.dfa.with_accepting(_derivative_accept(T.dfa, T.dfa.accept)))


def derivative_sequence(T: RegularBinaryTree) -> tuple[list[RegularBinaryTree], bool]:
    """T, d(T), d²(T), ... up to the first finite tree, or up to the fixpoint.
    The flag says whether the sequence ended in a finite tree."""
    seq = [T]
    while not seq[-1].is_finite():
        nxt = derivative(seq[-1])
        if np.array_equal(nxt.dfa.accept, seq[-1].dfa.accept):
            return seq, False
        seq.append(nxt)
    return seq, True


def cb_star_rank(T: RegularBinaryTree) -> int:
    """Least n with d^(n)(T) finite; raises :class:`NotT2Free` otherwise."""
    seq, ok = derivative_sequence(T)
    if not ok:
        raise NotT2Free(seq[-1])
    return len(seq) - 1


def is_t2_free(T: RegularBinaryTree) -> bool:
    return derivative_sequence(T)[1]


def _state_ranks(dfa: WordDFA) -> np.ndarray:
    """CB_* rank of T↾u as a function of the state of u (-1 outside T)."""
    seq, ok = derivative_sequence(RegularBinaryTree(dfa))
    if not ok:
        raise NotT2Free(seq[-1])
    ranks = np.full(dfa.num_states, -1, dtype=np.int64)
    ranks[dfa.accept] = 0
    # d^(i)(T↾u) is infinite iff state(u) has an infinite path inside d^(i)
    for i, S in enumerate(seq):
        inf = infinite_states(dfa, S.dfa.accept)
        ranks[inf] = i + 1
    return ranks


def subtree_index(T: RegularBinaryTree) -> int:
    """Number of distinct subtrees T↾u for u ∈ T."""
    if T.is_empty():
        return 0
    D = T.dfa.minimize()
    seen = {D.start}
    stack = [D.start]
    while stack:
        q = stack.pop()
        for d in (0, 1):
            r = int(D.delta[q, d])
            if D.accept[r] and r not in seen:
                seen.add(r)
                stack.append(r)
    return len(seen)


@dataclass
class AntichainReport:
    depth: int
    rank: int
    index: int
    bound: int
    max_found: int
    witness: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.max_found <= self.bound


def antichain_bound_check(T: RegularBinaryTree, depth: int) -> AntichainReport:
    """Largest anti-chain of full-rank nodes at depth <= ``depth``, compared
    with ``2^index``.

    Full-rank nodes (CB_*(T↾u) = CB_*(T)) form a prefix-closed set, so the
    maximum over all anti-chains is an exact recursion over the node tree:
    either take u itself or combine the best anti-chains below its children."""
    if not 0 <= depth <= MAX_ANTICHAIN_DEPTH:
        raise ResourceError(f"anti-chain depth {depth} outside 0..{MAX_ANTICHAIN_DEPTH}")
    dfa = T.dfa
    ranks = _state_ranks(dfa)
    rank = int(ranks[dfa.start]) if not T.is_empty() else 0
    full = ranks == rank if not T.is_empty() else np.zeros(dfa.num_states, dtype=bool)

    @functools.lru_cache(maxsize=None)
    def best(q: int, left: int) -> tuple[int, tuple[str, ...]]:
        if not full[q]:
            return 0, ()
        own = (1, ("",))
        if left == 0:
            return own
        below = [best(int(dfa.delta[q, d]), left - 1) for d in (0, 1)]
        total = below[0][0] + below[1][0]
        if total > 1:
            return total, tuple("0" + w for w in below[0][1]) + tuple("1" + w for w in below[1][1])
        return own

    count, witness = best(dfa.start, depth)
    index = subtree_index(T)
    return AntichainReport(depth, rank, index, 2 ** index, count, list(witness))


def max_antichain_bruteforce(T: RegularBinaryTree, depth: int) -> int:
    """Reference search over all anti-chains of full-rank nodes (tiny depths)."""
    ranks = _state_ranks(T.dfa)
    if T.is_empty():
        return 0
    rank = ranks[T.dfa.start]
    nodes = [w for w in T.sample_words(depth) if ranks[T.dfa.state_of(w)] == rank]
    best = 0
    for r in range(1, len(nodes) + 1):
        if r <= best:
            continue
        for combo in itertools.combinations(nodes, r):
            if all(not (a.startswith(b) or b.startswith(a)) for a, b in itertools.combinations(combo, 2)):
                best = r
                break
    return best


# -- independent reference checks ---------------------------------------------

def _reaches_cycle(dfa: WordDFA, q: int) -> bool:
    """Depth-first search for a cycle of accepting states reachable from q."""
    if not dfa.accept[q]:
        return False
    colour: dict[int, int] = {}

    def visit(p):
        colour[p] = 1
        for d in (0, 1):
            r = int(dfa.delta[p, d])
            if not dfa.accept[r]:
                continue
            c = colour.get(r, 0)
            if c == 1 or (c == 0 and visit(r)):
                return True
        colour[p] = 2
        return False

    return visit(q)


def in_derivative_reference(T: RegularBinaryTree, u: str) -> bool:
    """Definitional membership test for d(T): some v in T extending u has
    both children heading infinite subtrees."""
    dfa = T.dfa
    if u not in T:
        return False
    n = dfa.num_states
    frontier = {dfa.state_of(u)}
    seen = set(frontier)
    # every state reachable below u shows up within n steps
    for _ in range(n + 1):
        nxt = set()
        for q in frontier:
            if all(_reaches_cycle(dfa, int(dfa.delta[q, d])) for d in (0, 1)):
                return True
            for d in (0, 1):
                r = int(dfa.delta[q, d])
                if dfa.accept[r] and r not in seen:
                    seen.add(r)
                    nxt.add(r)
        frontier = nxt
    return False


def random_prefix_closed_dfa(rng: np.random.Generator, max_states: int = 8) -> WordDFA:
    """A random complete DFA whose only rejecting state is an absorbing sink."""
    n = int(rng.integers(2, max_states + 1))
    sink = n - 1
    delta = rng.integers(0, n, size=(n, 2))
    delta[sink] = sink
    acc = np.ones(n, dtype=bool)
    acc[sink] = False
    return WordDFA(delta, 0, acc)


# -- finite orderings ----------------------------------------------------------

class FiniteOrdering:
    """A finite linear order given by a boolean ``le`` matrix over ``elements``."""

    def __init__(self, elements: Sequence, le):
        self.elements = list(elements)
        le = np.asarray(le, dtype=bool).reshape(len(self.elements), len(self.elements))
        n = len(self.elements)
        if n:
            if not le.diagonal().all():
                raise ValueError("order is not reflexive")
            if (le & le.T & ~np.eye(n, dtype=bool)).any():
                raise ValueError("order is not antisymmetric")
            if not (le | le.T).all():
                raise ValueError("order is not total")
            if ((le.astype(int) @ le.astype(int) > 0) & ~le).any():
                raise ValueError("order is not transitive")
        self.le = le

    @classmethod
    def chain(cls, n: int) -> "FiniteOrdering":
        idx = np.arange(n)
        return cls(range(n), idx[:, None] <= idx[None, :])

    def __len__(self):
        return len(self.elements)

    def sorted_elements(self) -> list:
        pos = self.le.sum(axis=0)  # number of elements <= each one
        return [self.elements[i] for i in np.argsort(pos, kind="stable")]

    def interval_size(self, i: int, j: int) -> int:
        lo, hi = (i, j) if self.le[i, j] else (j, i)
        return int((self.le[lo, :] & self.le[:, hi]).sum())


def condense(O: FiniteOrdering) -> tuple[FiniteOrdering, list[list]]:
    """One finite-interval condensation step: x ~ y iff [x, y] is finite.
    Classes are listed in order; the quotient is ordered by its classes."""
    n = len(O)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if O.interval_size(i, j) < float("inf"):  # always finite here
                parent[find(j)] = find(i)
    classes: dict[int, list[int]] = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    blocks = sorted(classes.values(), key=lambda b: int(O.le[:, b[0]].sum()))
    k = len(blocks)
    qle = [[bool(O.le[a[0], b[0]]) for b in blocks] for a in blocks]
    return FiniteOrdering(range(k), np.array(qle).reshape(k, k)), \
        [[O.elements[i] for i in b] for b in blocks]


def fc_rank_finite(O: FiniteOrdering) -> int:
    """Number of condensation steps until the quotient stops shrinking."""
    rank = 0
    while True:
        Q, _ = condense(O)
        if len(Q) == len(O):
            return rank
        O, rank = Q, rank + 1
