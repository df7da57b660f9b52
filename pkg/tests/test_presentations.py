"""Ordinal presentations: naming maps, order automata, rank-bounded builds."""

import itertools

import pytest
from hypothesis import given, strategies as st

from treeord import automata as ta
from treeord import presentations as pr
from treeord.automata import ResourceError
from treeord.logic import PresentationError, load_presentation
from treeord.ordinals import CNF, OMEGA, ZERO, compare, omega_power, parse_ordinal
from treeord.trees import EMPTY, Tree, path, subtree
from conftest import cnfs

W = OMEGA
ALL_TREES = ta.all_trees(("a",), 8)


def lemma9_member(t, k):
    """Domain description of the level-k encodings, written out directly."""
    if k == 0:
        return t.domain == frozenset("0" * i for i in range(len(t)))
    n = 0
    while "0" * n in t:
        n += 1
    for u in t.nodes():
        i = len(u) - len(u.lstrip("0"))
        on_spine = u == "0" * i and i < n
        hanging = i < n and u.startswith("0" * i + "1")
        if not (on_spine or hanging):
            return False
    for i in range(n):
        v = "0" * i + "1"
        child = subtree(t, v) if v in t else EMPTY
        if not lemma9_member(child, k - 1):
            return False
    return n == 0 or "0" * (n - 1) + "1" in t


@pytest.mark.parametrize("k", [0, 1, 2])
def test_universe_matches_domain_description(k):
    U = pr.universe_automaton(k)
    for t in ALL_TREES:
        assert ta.accepts(U, t) == lemma9_member(t, k), t


@pytest.mark.parametrize("k", [0, 1, 2])
def test_order_matches_cnf_comparison(k, omega, tower1, tower2):
    P = [omega, tower1, tower2][k]
    elems = P.elements(6)
    vals = [P.decode(t) for t in elems]
    assert len(set(vals)) == len(vals)
    for (s, a), (t, b) in itertools.product(zip(elems, vals), repeat=2):
        assert P.le(s, t) == (compare(a, b) <= 0)
        assert P.holds("eq", s, t) == (a == b)


def test_level0_examples(omega):
    assert omega.decode(EMPTY) == ZERO
    assert omega.decode(path(3)) == 3
    assert omega.elements(3) == [EMPTY, path(1), path(2), path(3)]


def test_level1_examples(tower1):
    t = tower1.encode(W * 2 + 1)
    # spine 0^{<2}: f(0) = 1 under "1", f(1) = 2 under "01"
    assert t.nodes() == ["", "0", "1", "01", "010"]
    assert tower1.decode(t) == W * 2 + 1
    u = Tree.from_domain(["", "0", "01", "010", "0100"])
    assert tower1.decode(u) == W * 3


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_first_element_is_zero(k):
    P = pr.build_omega_tower(k)
    assert P.elements(0) == [EMPTY]
    assert P.decode(P.elements(3)[0]) == ZERO


@given(st.data())
def test_round_trip(tower1, tower2, data):
    for k, P in ((1, tower1), (2, tower2)):
        a = data.draw(cnfs(degree=k - 1))
        t = P.encode(a)
        assert P.contains(t)
        assert P.decode(t) == a


@pytest.mark.parametrize("k,alphas", [
    (1, ["0", "4", "w*3 + 1", "w^5*2 + w"]),
    (2, ["0", "w^(w*2+1)*3 + w", "w^w + 7"]),
])
def test_digit_maps(k, alphas):
    for text in alphas:
        a = parse_ordinal(text)
        f = pr.digits(a, k)
        assert pr.undigits(f, k) == a
        assert not f or f[-1]


def test_sorted_elements_strictly_increasing(tower1):
    elems = pr.sorted_elements(tower1, 6)
    vals = [tower1.decode(t) for t in elems]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_naming_errors(omega, tower1):
    with pytest.raises(PresentationError):
        omega.encode(W)
    with pytest.raises(PresentationError):
        tower1.decode(Tree.from_domain(["", "0"]))       # last spine entry is 0
    with pytest.raises(PresentationError):
        omega.decode(Tree.from_domain(["", "1"]))
    with pytest.raises(ResourceError):
        pr.build_omega_tower(4)


def test_tuple_tower_order():
    P = pr.build_tuple_tower(1, 2)
    elems = P.elements(5)
    vals = [P.decode(t) for t in elems]
    assert len(set(vals)) == len(vals)
    for (s, a), (t, b) in itertools.product(zip(elems, vals), repeat=2):
        assert P.le(s, t) == (a <= b)
    assert P.order_type == omega_power(2)
    assert P.decode(P.encode(W * 3 + 2)) == W * 3 + 2


@pytest.mark.parametrize("alpha,k", [("5", 1), ("w^2", 1), ("w^2 + w*3 + 1", 1),
                                      ("w*5", 1), ("w^w", 2), ("w^(w+1)*2 + w^3", 2)])
def test_rank_bounded_order_type(alpha, k):
    a = parse_ordinal(alpha)
    P = pr.build_rank_bounded(a, k)
    assert P.order_type == a
    elems = P.elements(6)
    vals = [P.decode(t) for t in elems]
    assert all(v < a for v in vals)
    for (s, x), (t, y) in itertools.product(zip(elems, vals), repeat=2):
        assert P.le(s, t) == (x <= y)
    # every ordinal below a whose encoding is small shows up
    small = {P.decode(t) for t in elems}
    for b in [ZERO, CNF.of(1), CNF.of(3)]:
        if b < a:
            assert b in small


def test_rank_bounded_examples():
    five = pr.build_rank_bounded(5, 1)
    assert [five.decode(t) for t in pr.sorted_elements(five, 8)] == [CNF.of(i) for i in range(5)]
    assert len(ta.enumerate_trees(five.universe, 12)) == 5
    w2 = pr.build_rank_bounded(omega_power(2), 1)
    assert w2.tracks == 2
    with pytest.raises(PresentationError):
        pr.build_rank_bounded(omega_power(W), 1)
    with pytest.raises(ResourceError):
        pr.build_rank_bounded(omega_power(5), 1)
    # four tracks pass the track cap but exceed the transition-table limit
    with pytest.raises(ResourceError):
        pr.build_rank_bounded(parse_ordinal("w^3*2 + w + 1"), 1)


def test_saved_presentations_reload(tmp_path, tower1):
    tower1.save(tmp_path / "t")
    P = load_presentation(tmp_path / "t")
    assert isinstance(P, pr.OrdinalPresentation) and P.level == 1
    R = pr.build_rank_bounded(W * 5, 1)
    R.save(tmp_path / "r")
    Q = load_presentation(tmp_path / "r")
    assert Q.order_type == W * 5
    assert ta.language_equivalent(Q.universe, R.universe)
