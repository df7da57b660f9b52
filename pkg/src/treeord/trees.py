"""Finite binary trees over an alphabet.

Nodes are bit strings (``""`` is the root, ``"01"`` the right child of the
left child).  Canonical node order is length first, then lexicographic.
Symbols are opaque hashable values: plain strings for base alphabets and
tuples for convolution alphabets, where the reserved string ``BOX`` pads
tracks that do not reach a node.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping, Sequence

Symbol = Hashable

BOX = "_"
EMPTY_LINE = "<empty>"


class TreeError(ValueError):
    """Malformed tree or tree operation outside its domain."""


def node_key(u: str) -> tuple[int, str]:
    return (len(u), u)


def canonical(nodes: Iterable[str]) -> list[str]:
    return sorted(nodes, key=node_key)


def _check_word(u: str) -> None:
    if not isinstance(u, str) or any(c not in "01" for c in u):
        raise TreeError(f"not a node word: {u!r}")


def is_prefix_closed(nodes: Iterable[str]) -> bool:
    nodes = set(nodes)
    return all(u[:-1] in nodes for u in nodes if u)


def boundary(nodes: Iterable[str]) -> set[str]:
    """Children of domain nodes that lie outside the domain; {""} for an empty domain."""
    nodes = set(nodes)
    if not nodes:
        return {""}
    return {u + d for u in nodes for d in "01" if u + d not in nodes}


def is_prefix(u: str, v: str) -> bool:
    return v.startswith(u)


class Tree:
    """A finite binary tree: a prefix-closed domain with a label per node.

    Trees are immutable and hashable; two trees are equal iff they have the
    same domain and labels.
    """

    __slots__ = ("_labels", "_items", "_hash")

    def __init__(self, labels: Mapping[str, Symbol] | None = None):
        labels = dict(labels or {})
        for u in labels:
            _check_word(u)
        for u in labels:
            if u and u[:-1] not in labels:
                raise TreeError(f"domain not prefix-closed: node {u!r} has no parent {u[:-1]!r}")
        self._labels = labels
        self._items = tuple((u, labels[u]) for u in canonical(labels))
        self._hash = hash(self._items)

    @classmethod
    def from_domain(cls, nodes: Iterable[str], symbol: Symbol = "a") -> "Tree":
        return cls({u: symbol for u in nodes})

    @property
    def labels(self) -> Mapping[str, Symbol]:
        return self._labels

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._labels)

    def nodes(self) -> list[str]:
        """Domain nodes in canonical order."""
        return [u for u, _ in self._items]

    def items(self) -> tuple[tuple[str, Symbol], ...]:
        return self._items

    def boundary(self) -> set[str]:
        return boundary(self._labels)

    def __getitem__(self, u: str) -> Symbol:
        return self._labels[u]

    def __contains__(self, u: object) -> bool:
        return u in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def __bool__(self) -> bool:
        return bool(self._labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self._labels:
            return "Tree({})"
        body = ", ".join(f"{u or 'ε'}:{format_symbol(a)}" for u, a in self._items)
        return f"Tree({body})"

    def restrict(self, nodes: Iterable[str]) -> "Tree":
        """Restriction to ``dom(t) ∩ nodes``; ``nodes`` must be prefix-closed."""
        keep = set(nodes)
        return Tree({u: a for u, a in self._labels.items() if u in keep})


EMPTY = Tree()


def path(n: int, symbol: Symbol = "a") -> Tree:
    """The tree with domain {0}^{<n}."""
    return Tree({"0" * i: symbol for i in range(n)})


def subtree(t: Tree, u: str) -> Tree:
    """The subtree of ``t`` rooted at ``u``."""
    _check_word(u)
    if u not in t:
        raise TreeError(f"node {u!r} not in the domain")
    n = len(u)
    return Tree({v[n:]: a for v, a in t.labels.items() if v.startswith(u)})


def substitute(t: Tree, bindings: Sequence[tuple[str, Tree]]) -> Tree:
    """Simultaneously replace the subtree at each ``u_i`` by ``t_i``.

    Each position must lie in ``dom(t) ∪ ∂dom(t)`` and no position may be a
    prefix of another.
    """
    if not bindings:
        return t
    allowed = set(t.labels) | t.boundary()
    positions = [u for u, _ in bindings]
    for u in positions:
        _check_word(u)
        if u not in allowed:
            raise TreeError(f"position {u!r} outside dom(t) ∪ ∂dom(t)")
    for i, u in enumerate(positions):
        for v in positions[i + 1:]:
            if is_prefix(u, v) or is_prefix(v, u):
                raise TreeError(f"positions {u!r} and {v!r} are prefix-comparable")
    labels = {v: a for v, a in t.labels.items()
              if not any(v.startswith(u) for u in positions)}
    for u, s in bindings:
        for v, a in s.labels.items():
            labels[u + v] = a
    return Tree(labels)


def convolve(trees: Sequence[Tree]) -> Tree:
    """Overlay ``n >= 1`` trees into one tree labelled by n-tuples, padding with BOX."""
    if len(trees) == 0:
        raise TreeError("convolution of zero trees")
    nodes = set()
    for s in trees:
        nodes.update(s.labels)
    return Tree({u: tuple(s.labels.get(u, BOX) for s in trees) for u in nodes})


def deconvolve(t: Tree, i: int) -> Tree:
    """Track ``i`` of a convolution."""
    arity = None
    for u, a in t.items():
        if not isinstance(a, tuple):
            raise TreeError(f"node {u!r}: label {a!r} is not a tuple")
        if arity is None:
            arity = len(a)
        elif len(a) != arity:
            raise TreeError(f"node {u!r}: label arity {len(a)} differs from {arity}")
        if all(x == BOX for x in a):
            raise TreeError(f"node {u!r}: all tracks padded")
    if arity is not None and not 0 <= i < arity:
        raise TreeError(f"track {i} out of range for arity {arity}")
    tracks: dict[int, dict[str, Symbol]] = {}
    for j in range(arity or 0):
        labels = {u: a[j] for u, a in t.items() if a[j] != BOX}
        for u in labels:
            if u and u[:-1] not in labels:
                raise TreeError(f"track {j} not prefix-closed at node {u!r}")
        tracks[j] = labels
    return Tree(tracks.get(i, {}))


def deconvolve_all(t: Tree, arity: int) -> list[Tree]:
    if not t:
        return [EMPTY] * arity
    return [deconvolve(t, i) for i in range(arity)]


# -- text format -------------------------------------------------------------

def format_symbol(a: Symbol) -> str:
    if isinstance(a, tuple):
        return "(" + ",".join(format_symbol(x) for x in a) + ")"
    return str(a)


def parse_symbol(text: str) -> Symbol:
    sym, pos = _parse_symbol(text, 0)
    if pos != len(text):
        raise TreeError(f"trailing characters in symbol {text!r} at position {pos}")
    return sym


def _parse_symbol(text: str, pos: int) -> tuple[Symbol, int]:
    if pos < len(text) and text[pos] == "(":
        items = []
        pos += 1
        while True:
            item, pos = _parse_symbol(text, pos)
            items.append(item)
            if pos >= len(text):
                raise TreeError(f"unterminated tuple symbol {text!r}")
            if text[pos] == ",":
                pos += 1
            elif text[pos] == ")":
                return tuple(items), pos + 1
            else:
                raise TreeError(f"unexpected {text[pos]!r} in symbol {text!r} at position {pos}")
    start = pos
    while pos < len(text) and text[pos] not in "(),":
        pos += 1
    if pos == start:
        raise TreeError(f"empty symbol in {text!r} at position {pos}")
    return text[start:pos], pos


def dumps(t: Tree) -> str:
    """One ``bitstring:symbol`` line per node in canonical order."""
    if not t:
        return EMPTY_LINE + "\n"
    return "".join(f"{u}:{format_symbol(a)}\n" for u, a in t.items())


def loads(text: str) -> Tree:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if lines == [EMPTY_LINE]:
        return EMPTY
    labels: dict[str, Symbol] = {}
    for lineno, line in enumerate(lines, 1):
        node, sep, sym = line.partition(":")
        if not sep:
            raise TreeError(f"line {lineno}: expected 'bitstring:symbol', got {line!r}")
        if any(c not in "01" for c in node):
            raise TreeError(f"line {lineno}: bad node word {node!r}")
        if node in labels:
            raise TreeError(f"line {lineno}: duplicate node {node!r}")
        labels[node] = parse_symbol(sym)
    for lineno, line in enumerate(lines, 1):
        node = line.partition(":")[0]
        if node and node[:-1] not in labels:
            raise TreeError(f"line {lineno}: node {node!r} has no parent {node[:-1]!r} "
                            "(domain not prefix-closed)")
    return Tree(labels)


def all_domains(max_nodes: int) -> list[frozenset[str]]:
    """All tree domains with at most ``max_nodes`` nodes (sorted by size, then canonically)."""
    by_size: list[list[frozenset[str]]] = [[frozenset()]]
    seen = {frozenset()}
    for size in range(1, max_nodes + 1):
        layer = []
        for dom in by_size[-1]:
            for b in boundary(dom):
                new = dom | {b}
                if new not in seen:
                    seen.add(new)
                    layer.append(new)
        by_size.append(layer)
    out = []
    for layer in by_size:
        out.extend(sorted(layer, key=lambda d: [node_key(u) for u in canonical(d)]))
    return out
