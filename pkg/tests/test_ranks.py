"""Derivatives, CB_* ranks, subtree index, anti-chains and finite orderings."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeord import presentations as pr
from treeord import ranks as rk
from treeord.automata import ResourceError, WordDFA
from treeord.ranks import FiniteOrdering, NotT2Free, RegularBinaryTree


@st.composite
def dfas(draw, max_states=6):
    seed = draw(st.integers(0, 2**32 - 1))
    return rk.random_prefix_closed_dfa(np.random.default_rng(seed), max_states)


@st.composite
def t2_free_dfas(draw, max_states=6):
    """Transitions never go to a smaller state and no state loops on both
    bits, so every cycle is a one-sided self-loop."""
    n = draw(st.integers(2, max_states))
    sink = n - 1
    rows = []
    for q in range(n - 1):
        row = [draw(st.integers(q, n - 1)) for _ in range(2)]
        if row == [q, q]:
            row[draw(st.integers(0, 1))] = draw(st.integers(q + 1, n - 1))
        rows.append(row)
    rows.append([sink, sink])
    acc = [True] * (n - 1) + [False]
    return WordDFA(rows, 0, acc)


def words_upto(T, depth):
    return set(T.sample_words(depth))


def tower_tree(k):
    return RegularBinaryTree.from_presentation(pr.build_omega_tower(k))


# -- examples ------------------------------------------------------------------

def test_derivative_examples():
    fin = RegularBinaryTree.from_words(["", "0", "01"])
    assert rk.derivative(fin).is_empty()
    assert rk.derivative(RegularBinaryTree.spine()).is_empty()
    d = rk.derivative(RegularBinaryTree.comb())
    assert d.equivalent(RegularBinaryTree.spine())


def test_rank_examples():
    assert rk.cb_star_rank(RegularBinaryTree.from_words(["", "1"])) == 0
    assert rk.cb_star_rank(RegularBinaryTree.from_words([])) == 0
    assert rk.cb_star_rank(RegularBinaryTree.spine()) == 1
    assert rk.cb_star_rank(RegularBinaryTree.comb()) == 2
    with pytest.raises(NotT2Free) as exc:
        rk.cb_star_rank(RegularBinaryTree.full())
    assert not exc.value.witness.is_finite()
    assert not rk.is_t2_free(RegularBinaryTree.full())
    assert rk.is_t2_free(RegularBinaryTree.spine()) and rk.is_t2_free(RegularBinaryTree.comb())


@pytest.mark.parametrize("k", [0, 1, 2])
def test_tower_rank(k):
    assert rk.cb_star_rank(tower_tree(k)) == k + 1


def test_tower1_tree_is_comb():
    assert tower_tree(1).equivalent(RegularBinaryTree.comb())


def test_subtree_index_examples():
    assert rk.subtree_index(RegularBinaryTree.spine()) == 1
    assert rk.subtree_index(RegularBinaryTree.full()) == 1
    assert rk.subtree_index(RegularBinaryTree.comb()) == 2
    assert rk.subtree_index(RegularBinaryTree.from_words([])) == 0


def test_not_prefix_closed_rejected():
    with pytest.raises(ValueError):
        RegularBinaryTree(WordDFA([[1, 1], [1, 1]], 0, [False, True]))


# -- oracles ---------------------------------------------------------------------

@given(dfas())
def test_derivative_matches_definition(dfa):
    T = RegularBinaryTree(dfa)
    d = rk.derivative(T)
    for w in T.sample_words(5):
        assert (w in d) == rk.in_derivative_reference(T, w)
    assert d.dfa.is_prefix_closed()


@given(dfas(), st.data())
def test_derivative_commutes_with_subtrees(dfa, data):
    T = RegularBinaryTree(dfa)
    u = data.draw(st.sampled_from(T.sample_words(3)))
    left = rk.derivative(T.subtree(u))
    right = rk.derivative(T).subtree(u) if u in rk.derivative(T) else None
    if right is None:
        assert left.is_empty()
    else:
        assert words_upto(left, 5) == words_upto(right, 5)
    if rk.is_t2_free(T):
        assert rk.cb_star_rank(T.subtree(u)) <= rk.cb_star_rank(T)


@given(dfas())
def test_subtree_index_brute_force(dfa):
    T = RegularBinaryTree(dfa)
    n = dfa.num_states
    # minimal-DFA states are separated by words shorter than n
    subtrees = {frozenset(words_upto(T.subtree(u), n)) for u in T.sample_words(n)}
    assert rk.subtree_index(T) == len(subtrees)


@given(t2_free_dfas())
def test_generated_trees_are_t2_free(dfa):
    assert rk.is_t2_free(RegularBinaryTree(dfa))


@given(t2_free_dfas(max_states=5), st.integers(0, 4))
def test_antichain_recursion_matches_brute_force(dfa, depth):
    T = RegularBinaryTree(dfa)
    rep = rk.antichain_bound_check(T, depth)
    assert rep.max_found == rk.max_antichain_bruteforce(T, depth)
    assert rep.holds
    assert len(rep.witness) == rep.max_found
    for a, b in itertools.combinations(rep.witness, 2):
        assert not (a.startswith(b) or b.startswith(a))


def test_antichain_examples():
    rep = rk.antichain_bound_check(RegularBinaryTree.spine(), 6)
    assert (rep.max_found, rep.bound) == (1, 2)
    fin = RegularBinaryTree.from_words(["", "0", "1", "00"])
    rep = rk.antichain_bound_check(fin, 3)
    # every node of a finite tree has rank 0 = CB_*(T), so leaves count
    assert rep.max_found == 2 and rep.holds
    rep = rk.antichain_bound_check(tower_tree(1), 5)
    assert rep.holds and rep.rank == 2
    with pytest.raises(ResourceError):
        rk.antichain_bound_check(RegularBinaryTree.spine(), 11)
    with pytest.raises(NotT2Free):
        rk.antichain_bound_check(RegularBinaryTree.full(), 3)


# -- finite orderings --------------------------------------------------------------

def test_finite_ordering_validation():
    with pytest.raises(ValueError):
        FiniteOrdering([0, 1], [[True, False], [False, True]])
    with pytest.raises(ValueError):
        FiniteOrdering([0, 1], [[True, True], [True, True]])


def test_condense_and_fc_rank():
    Q, parts = rk.condense(FiniteOrdering.chain(0))
    assert len(Q) == 0 and parts == []
    Q, parts = rk.condense(FiniteOrdering.chain(1))
    assert len(Q) == 1
    Q, parts = rk.condense(FiniteOrdering.chain(5))
    assert len(Q) == 1 and parts == [[0, 1, 2, 3, 4]]
    assert [rk.fc_rank_finite(FiniteOrdering.chain(n)) for n in (0, 1, 5)] == [0, 0, 1]
