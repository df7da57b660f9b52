"""s̄-types, class automata, box verification and the finite checkers."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeord import automata as ta
from treeord import decomposition as dc
from treeord.logic import PresentationError, compile_formula, parameter_language
from treeord.ordinals import OMEGA
from treeord.ranks import FiniteOrdering
from treeord.trees import EMPTY, Tree, convolve, path, subtree

W = OMEGA
LT = "le(x,y) & !eq(x,y)"
INTERVAL = "le(y1,x) & le(x,y2)"


def mu(n):
    return path(n)


# -- s̄-types -------------------------------------------------------------------

def test_stype_examples(omega):
    A = compile_formula(LT, omega, free_vars=["x", "y"])
    s = [mu(2)]
    t0 = dc.stype_of(omega, A, s, mu(0))
    assert t0.t_D == EMPTY and t0.U == ()
    t5 = dc.stype_of(omega, A, s, mu(5))
    assert t5.t_D == path(2) and t5.U == ("00",)
    ctx = dc.TypeContext(omega, A, s)
    assert t5.rho == (ctx.joint(path(3)),)
    assert dc.stype_of(omega, A, s, mu(1)).U == ()
    with pytest.raises(PresentationError):
        dc.stype_of(omega, A, s, Tree({"": "a", "1": "a"}))


@pytest.mark.parametrize("k,params", [(0, [3]), (1, [W + 1, W * 2])])
def test_stype_parts_match_definition(k, params, omega, tower1):
    P = [omega, tower1][k]
    trees = [P.encode(a) for a in params]
    ctx = dc.TypeContext(P, compile_formula("le(x,y)", P, free_vars=["x", "y"]), trees[:1])
    D = trees[0].domain
    for t in P.elements(6):
        s = ctx.stype(t)
        assert s.t_D.domain == t.domain & D
        assert set(s.U) == t.domain & ctx.dD
        assert not set(s.U) & s.t_D.domain


# -- decompose -------------------------------------------------------------------

def test_omega_strict_lower_set(omega):
    rep = dc.decompose(omega, LT, {"y": mu(2)})
    assert len(rep.classes) == 2
    members = [ta.enumerate_trees(c.automaton, 6) for c in rep.classes]
    assert sorted(members, key=lambda m: len(m[0])) == [[mu(0)], [mu(1)]]
    assert all(not c.stype.U for c in rep.classes)
    assert dc.verify_report(rep) and rep.ok


def test_empty_formula_has_no_classes(omega):
    rep = dc.decompose(omega, "le(x,y) & !le(x,y)", {"y": mu(2)})
    assert rep.classes == []
    assert ta.is_empty(dc.class_union(rep))


def test_tower1_interval_example(tower1):
    params = {"y1": tower1.encode(0), "y2": tower1.encode(W * 3 + 2)}
    rep = dc.decompose(tower1, INTERVAL, params)
    target = parameter_language(INTERVAL, tower1, "x", params)
    assert ta.language_equivalent(dc.class_union(rep), target)
    assert dc.classes_disjoint(rep)
    dD = rep.context.dD
    assert all(len(c.stype.U) <= len(dD) for c in rep.classes)
    assert dc.verify_report(rep, budget=60)


@given(st.integers(0, 4), st.integers(0, 4))
def test_omega_interval_coverage(omega, a, b):
    params = {"y1": mu(a), "y2": mu(b)}
    rep = dc.decompose(omega, INTERVAL, params)
    target = parameter_language(INTERVAL, omega, "x", params)
    assert ta.language_equivalent(dc.class_union(rep), target)
    assert dc.classes_disjoint(rep)


def test_class_membership_is_type_equality(tower1):
    params = {"y1": tower1.encode(W), "y2": tower1.encode(W * 2 + 3)}
    rep = dc.decompose(tower1, INTERVAL, params)
    ctx = rep.context
    phi = rep.phi_automaton
    for t in tower1.elements(6):
        in_phi = ta.accepts(phi, convolve([t] + ctx.params))
        hits = [c for c in rep.classes if ta.accepts(c.automaton, t)]
        assert len(hits) == (1 if in_phi else 0)
        if hits:
            assert hits[0].stype == ctx.stype(t)


def test_box_map_round_trip(tower1):
    params = {"y1": tower1.encode(0), "y2": tower1.encode(W * 2)}
    rep = dc.decompose(tower1, INTERVAL, params)
    for c in rep.classes:
        if not c.stype.U:
            continue
        xs = [ta.enumerate_trees(comp.structure.universe, 3)[0] for comp in c.components]
        t = c.box_map(xs)
        assert ta.accepts(c.automaton, t)
        assert [subtree(t, u) for u in c.stype.U] == xs


def test_gamma_indices_bounded(omega):
    seen = set()
    size = None
    for a, b in itertools.product(range(4), repeat=2):
        rep = dc.decompose(omega, INTERVAL, {"y1": mu(a), "y2": mu(b)})
        size = rep.gamma_size
        for c in rep.classes:
            seen.update(c.gammas)
    assert len(seen) <= size


def test_verify_detects_a_broken_entry(tower1):
    params = {"y1": tower1.encode(0), "y2": tower1.encode(W * 2)}
    rep = dc.decompose(tower1, INTERVAL, params)
    entry = next(c for c in rep.classes if c.stype.U)
    other = next(c for c in rep.classes if c is not entry)
    broken = dc.ClassEntry(entry.stype, entry.gammas, entry.components, other.automaton)
    res = dc.verify_box(rep, broken, budget=20)
    assert not res.ok and "class" in res.counterexample["reason"]


def test_report_text_and_save(tmp_path, omega):
    rep = dc.decompose(omega, INTERVAL, {"y1": mu(1), "y2": mu(3)})
    dc.verify_report(rep)
    text = rep.dumps()
    assert text.startswith("presentation: tower-0")
    assert f"classes: {len(rep.classes)}" in text
    assert "verification: pass" in text
    rep.save(tmp_path / "rep")
    assert (tmp_path / "rep" / "report.txt").read_text() == text
    assert (tmp_path / "rep" / "class_0.aut").exists()


def test_decompose_errors(omega):
    with pytest.raises(PresentationError):
        dc.decompose(omega, INTERVAL, {"y1": mu(1)})
    with pytest.raises(PresentationError):
        dc.decompose(omega, LT, {"y": Tree({"": "a", "1": "a"})})


# -- finite checkers against brute force ------------------------------------------

def random_ordering(rng, n):
    perm = rng.permutation(n)
    return FiniteOrdering(range(n), perm[:, None] <= perm[None, :])


def brute_sum(A, parts):
    n = len(A)
    if sum(len(p) for p in parts) != n:
        return False
    for labels in itertools.product(range(len(parts)), repeat=n):
        if all(labels.count(i) == len(p) for i, p in enumerate(parts)):
            return True          # every block of a linear order is a chain
    return False


def brute_box(A, parts):
    sizes = [len(p) for p in parts]
    cells = list(itertools.product(*(range(s) for s in sizes)))
    if len(cells) != len(A):
        return False
    for perm in itertools.permutations(range(len(A))):
        f = dict(zip(cells, perm))
        ok = True
        for x, y in itertools.combinations(cells, 2):
            diff = [j for j in range(len(sizes)) if x[j] != y[j]]
            if len(diff) == 1:
                j = diff[0]
                if bool(parts[j].le[x[j], y[j]]) != bool(A.le[f[x], f[y]]):
                    ok = False
                    break
        if ok:
            return True
    return False


def test_checker_examples():
    C = FiniteOrdering.chain
    assert dc.check_sum_augmentation(C(3), [C(2), C(1)])
    assert not dc.check_sum_augmentation(C(3), [C(3), C(1)])
    assert dc.check_sum_augmentation(C(2), [C(1), C(1)])
    assert dc.check_box_augmentation(C(6), [C(2), C(3)])
    assert not dc.check_box_augmentation(C(7), [C(2), C(3)])
    assert dc.check_caruth_finite(C(6), [C(2), C(3)], "box")
    with pytest.raises(ValueError):
        dc.check_caruth_finite(C(2), [C(2)], "other")


def test_checkers_match_brute_force():
    rng = np.random.default_rng(1)
    for n in range(0, 6):
        A = random_ordering(rng, n)
        for sizes in itertools.chain.from_iterable(
                itertools.product(range(1, 4), repeat=r) for r in (1, 2, 3)):
            parts = [random_ordering(rng, s) for s in sizes]
            assert dc.check_sum_augmentation(A, parts) == brute_sum(A, parts)
            if np.prod(sizes) <= 5:
                assert dc.check_box_augmentation(A, parts) == brute_box(A, parts)
