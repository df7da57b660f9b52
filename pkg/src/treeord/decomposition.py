"""Decomposition of a definable subset into a sum of tame boxes.

Fix a presentation, a formula ``φ(x, ȳ)`` and parameters ``s̄``.  With
``D = ∪ dom(s_i)``, every tree ``t`` has an s̄-type: its restriction to D,
the set U of boundary nodes of D it reaches, and for each such node the
automaton states reached by the subtree hanging there.  Types decide
membership in ``φ(·, s̄)``, so the definable set is a finite disjoint union of
type classes, and each class is in bijection with a product of simpler
structures ``S_γ`` through ``f(x_1..x_m) = t_D[u_1/x_1, ..., u_m/x_m]``.

Joint states are tuples indexed by ``names``: ``"phi"`` first, then the
relation names in sorted order.  Throughout, ``⟦t⟧_φ`` is the run of the φ
automaton on ``(t, ∅, ..., ∅)`` and ``⟦t⟧_R`` the run of the R automaton on
the diagonal convolution ``(t, ..., t)``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import automata as ta
from .logic import Formula, Presentation, PresentationError, compile_formula, parse_formula
from .ranks import FiniteOrdering
from .ordinals import CNF, natural_product_all, natural_sum_all
from .trees import BOX, EMPTY, Tree, boundary, canonical, convolve, dumps, format_symbol, subtree, substitute


class VerificationError(AssertionError):
    """A box check failed; carries the offending witness."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SType:
    """``(t↾D, U, ρ)``: U in canonical order, ``rho[i]`` the joint state of the
    subtree at ``U[i]``."""

    t_D: Tree
    U: tuple[str, ...]
    rho: tuple[tuple[int, ...], ...]

    def rho_of(self, k: int) -> dict[str, int]:
        return {u: j[k] for u, j in zip(self.U, self.rho)}


@dataclass(frozen=True)
class GammaIndex:
    q: tuple[tuple[str, int], ...]
    P: tuple[tuple[str, frozenset], ...]

    def __str__(self):
        qs = ", ".join(f"{r}={s}" for r, s in self.q)
        ps = ", ".join(f"{r}={{{','.join(map(str, sorted(p)))}}}" for r, p in self.P)
        return f"q[{qs}] P[{ps}]"


@dataclass
class ComponentStructure:
    gamma: GammaIndex
    structure: Presentation


@dataclass
class ClassEntry:
    stype: SType
    gammas: list[GammaIndex]
    components: list[ComponentStructure]
    automaton: ta.TreeAutomaton
    verification: "VerificationResult | None" = None

    @property
    def positions(self) -> tuple[str, ...]:
        return self.stype.U

    def box_map(self, xs: Sequence[Tree]) -> Tree:
        if len(xs) != len(self.stype.U):
            raise ValueError("box map needs one tree per boundary position")
        return substitute(self.stype.t_D, list(zip(self.stype.U, xs)))


@dataclass
class VerificationResult:
    ok: bool
    checks: int
    counterexample: dict | None = None


@dataclass
class DecompositionReport:
    presentation: str
    formula: str
    variable: str
    parameters: list[tuple[str, Tree]]
    names: list[str]
    classes: list[ClassEntry]
    gamma_size: int

    def dumps(self) -> str:
        out = [f"presentation: {self.presentation}",
               f"formula: {self.formula}",
               f"variable: {self.variable}",
               f"state-names: {' '.join(self.names)}",
               f"gamma-size: {self.gamma_size}"]
        for name, t in self.parameters:
            out.append(f"parameter {name}: " + " ".join(dumps(t).split()))
        out.append(f"classes: {len(self.classes)}")
        for i, c in enumerate(self.classes):
            st = c.stype
            out.append(f"class {i}:")
            out.append("  t_D: " + " ".join(dumps(st.t_D).split()))
            out.append("  U: " + (" ".join(u or "ε" for u in st.U) or "-"))
            for u, j in zip(st.U, st.rho):
                out.append(f"  rho[{u or 'ε'}]: " + " ".join(f"{n}={q}" for n, q in zip(self.names, j)))
            for u, g in zip(st.U, c.gammas):
                out.append(f"  gamma[{u or 'ε'}]: {g}")
            out.append(f"  automaton: class_{i}.aut ({c.automaton.num_states} states)")
            for k in range(len(c.components)):
                out.append(f"  component {k}: class_{i}_comp_{k}/")
            v = c.verification
            if v is None:
                out.append("  verification: not run")
            else:
                out.append(f"  verification: {'pass' if v.ok else 'FAIL'} ({v.checks} checks)")
                if v.counterexample:
                    out.append(f"  counterexample: {v.counterexample}")
        return "\n".join(out) + "\n"

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.txt").write_text(self.dumps())
        for i, c in enumerate(self.classes):
            (d / f"class_{i}.aut").write_text(ta.dumps(c.automaton))
            for k, comp in enumerate(c.components):
                comp.structure.save(d / f"class_{i}_comp_{k}")

    @property
    def ok(self) -> bool:
        return all(c.verification is None or c.verification.ok for c in self.classes)


# -- type context --------------------------------------------------------------

def _coreachable(A: ta.TreeAutomaton) -> np.ndarray:
    """States from which some context reaches an accepting state."""
    real = np.flatnonzero(A.realizable())
    alive = A.accept.copy()
    while True:
        hit = alive[A.delta[:, :, real]].any(axis=(0, 2)) | alive[A.delta[:, real, :]].any(axis=(0, 1))
        new = alive | hit
        if np.array_equal(new, alive):
            return alive
        alive = new


class TypeContext:
    """Everything needed to compute s̄-types for one (presentation, φ, s̄)."""

    def __init__(self, P: Presentation, phi_automaton: ta.TreeAutomaton,
                 params: Sequence[Tree]):
        self.P = P
        self.sigma = P.alphabet
        self.params = list(params)
        self.n = len(self.params)
        for s in self.params:
            if not P.contains(s):
                raise PresentationError("parameter outside the universe")
        if phi_automaton.alphabet != ta.conv_alphabet(self.sigma, 1 + self.n):
            raise ValueError("φ automaton alphabet does not match 1 + #parameters tracks")
        self.A_phi = phi_automaton
        self.names = ["phi"] + sorted(P.relations)
        self.autos = [phi_automaton] + [P.relations[r][1] for r in self.names[1:]]
        self.arity = [1 + self.n] + [P.relations[r][0] for r in self.names[1:]]
        pad = (BOX,) * self.n
        self.diag = [ta.relabel(phi_automaton, self.sigma, lambda a: (a,) + pad, minimal=False)]
        for r in self.names[1:]:
            k, A = P.relations[r]
            self.diag.append(ta.relabel(A, self.sigma, lambda a, k=k: (a,) * k, minimal=False))
        self.D = frozenset().union(*(s.domain for s in self.params)) if self.params else frozenset()
        self.dD = frozenset(boundary(self.D))
        self.D_nodes = canonical(self.D)
        self.dD_nodes = canonical(self.dD)
        self._joint = None

    def joint(self, t: Tree) -> tuple[int, ...]:
        return tuple(ta.run(A, t) for A in self.diag)

    def joint_values(self) -> list[tuple[int, ...]]:
        """Joint states realized by nonempty trees."""
        if self._joint is None:
            diag = self.diag

            def step(a, s0, s1):
                return tuple(int(A.delta[A.index[a], p, q]) for A, p, q in zip(diag, s0, s1))

            start = tuple(A.start for A in diag)
            A, states = ta.explore(self.sigma, start, step, lambda s: True, return_states=True)
            ne = A.nonempty_realizable()
            self._joint = [states[i] for i in range(len(states)) if ne[i]]
        return self._joint

    def stype(self, t: Tree) -> SType:
        if not self.P.contains(t):
            raise PresentationError("tree is not in the universe")
        return self._stype(t)

    def _stype(self, t: Tree) -> SType:
        U = tuple(u for u in self.dD_nodes if u in t)
        rho = tuple(self.joint(subtree(t, u)) for u in U)
        return SType(t.restrict(self.D), U, rho)

    def phi_state(self, st: SType) -> int:
        """Run of A_φ on ⊗(t_D, s̄) with ρ_φ on U."""
        conv = convolve([st.t_D] + self.params)
        return ta.run(self.A_phi, conv, rho=st.rho_of(0))

    def gamma(self, st: SType, u: str) -> GammaIndex:
        i = st.U.index(u)
        q = tuple((n, int(st.rho[i][k])) for k, n in enumerate(self.names))
        P = []
        for k, name in enumerate(self.names[1:], 1):
            A = self.autos[k]
            conv = convolve([st.t_D] * self.arity[k])
            base = st.rho_of(k)
            good = frozenset(p for p in range(A.num_states)
                             if A.accept[ta.run(A, conv, rho={**base, u: p})])
            P.append((name, good))
        return GammaIndex(q, tuple(P))

    def gamma_size(self) -> int:
        qs = math.prod(A.num_states for A in self.autos)
        return qs * math.prod(2 ** A.num_states for A in self.autos[1:])

    # enumeration of the types whose class lies inside φ(·, s̄)
    def accepted_types(self) -> list[SType]:
        A = self.A_phi
        alive = _coreachable(A)
        J = self.joint_values()
        sym_cache = {}

        def sym(v, a):
            key = (v, a)
            if key not in sym_cache:
                sym_cache[key] = A.index[(a,) + tuple(s.labels.get(v, BOX) for s in self.params)]
            return sym_cache[key]

        def rec(v: str, parent_in: bool) -> dict[int, list]:
            out: dict[int, list] = {}
            if v in self.dD:
                out.setdefault(A.start, []).append(((), ()))
                if not parent_in:
                    return out
                for j in J:
                    if alive[j[0]]:
                        out.setdefault(j[0], []).append(((), ((v, j),)))
                return {q: opts for q, opts in out.items() if alive[q]}
            left, right = rec(v + "0", False), rec(v + "1", False)
            (q0,), (q1,) = left, right
            q = int(A.delta[sym(v, BOX), q0, q1])
            if alive[q] or not parent_in:
                out[q] = [((), ())]
            if not parent_in:
                return out
            left, right = rec(v + "0", True), rec(v + "1", True)
            for a in self.sigma:
                ai = sym(v, a)
                for q0, L0 in left.items():
                    for q1, L1 in right.items():
                        q = int(A.delta[ai, q0, q1])
                        if not alive[q]:
                            continue
                        bucket = out.setdefault(q, [])
                        for (lab0, u0), (lab1, u1) in itertools.product(L0, L1):
                            bucket.append((((v, a),) + lab0 + lab1, u0 + u1))
            return out

        root = rec("", True)
        types = []
        for q, opts in root.items():
            if not A.accept[q]:
                continue
            for labels, us in opts:
                us = sorted(us, key=lambda p: (len(p[0]), p[0]))
                types.append(SType(Tree(dict(labels)), tuple(u for u, _ in us),
                                   tuple(j for _, j in us)))
        types.sort(key=_type_key)
        return types

    def class_automaton(self, st: SType) -> ta.TreeAutomaton:
        """Trees whose s̄-type is exactly ``st``; states pair the joint state
        with the set of positions in D ∪ ∂D where the subtree fits ``st``."""
        diag = self.diag
        rho = dict(zip(st.U, st.rho))
        tD = st.t_D
        D, dD = self.D, self.dD
        positions = canonical(D | dD)
        inner = [p for p in positions if p in D]
        empty_fit = frozenset(p for p in positions
                              if (p in dD and p not in rho) or (p in D and p not in tD))
        start = (tuple(A.start for A in diag), empty_fit)

        def step(a, s0, s1):
            j = tuple(int(A.delta[A.index[a], p, q]) for A, p, q in zip(diag, s0[0], s1[0]))
            fit = set()
            for p in rho:
                if rho[p] == j:
                    fit.add(p)
            for p in inner:
                if p in tD and tD[p] == a and p + "0" in s0[1] and p + "1" in s1[1]:
                    fit.add(p)
            return (j, frozenset(fit))

        return ta.explore(self.sigma, start, step, lambda s: "" in s[1])

    def component(self, gamma: GammaIndex) -> Presentation:
        """S_γ restricted to nonempty trees, with relations accepting by P_R."""
        diag = self.diag
        target = tuple(q for _, q in gamma.q)
        start = (tuple(A.start for A in diag), False)

        def step(a, s0, s1):
            return (tuple(int(A.delta[A.index[a], p, q]) for A, p, q in zip(diag, s0[0], s1[0])), True)

        universe = ta.explore(self.sigma, start, step, lambda s: s[1] and s[0] == target)
        rels = {}
        for k, (name, good) in enumerate(gamma.P, 1):
            A = self.autos[k]
            mask = np.zeros(A.num_states, dtype=bool)
            mask[list(good)] = True
            rels[name] = (self.arity[k], ta.with_accepting(A, mask))
        return Presentation(self.sigma, universe, rels, name="S_gamma")


def _type_key(st: SType):
    return (len(st.t_D), [(len(u), u, str(a)) for u, a in st.t_D.items()],
            len(st.U), st.U, st.rho)


def stype_of(P: Presentation, phi_automaton: ta.TreeAutomaton,
             params: Sequence[Tree], t: Tree) -> SType:
    return TypeContext(P, phi_automaton, params).stype(t)


# -- the engine ----------------------------------------------------------------

def _split_params(params) -> list[tuple[str, Tree]]:
    if isinstance(params, Mapping):
        return list(params.items())
    return [(n, t) for n, t in params]


def decompose(P: Presentation, phi: Formula | str, params, var: str = "x") -> DecompositionReport:
    """Split ``φ(·, s̄)`` into s̄-type classes with their box factors.

    ``params`` maps each remaining free variable of φ to a universe tree."""
    f = parse_formula(phi) if isinstance(phi, str) else phi
    pairs = _split_params(params)
    names = [n for n, _ in pairs]
    free = f.free_vars()
    extra = set(free) - set(names) - {var}
    if extra:
        raise PresentationError(f"no parameter given for {sorted(extra)}")
    A_phi = compile_formula(f, P, free_vars=[var] + names)
    ctx = TypeContext(P, A_phi, [t for _, t in pairs])
    classes = []
    for st in ctx.accepted_types():
        gammas = [ctx.gamma(st, u) for u in st.U]
        comps = [ComponentStructure(g, ctx.component(g)) for g in gammas]
        classes.append(ClassEntry(st, gammas, comps, ctx.class_automaton(st)))
    report = DecompositionReport(P.name, str(f), var, pairs, ctx.names, classes, ctx.gamma_size())
    report.context = ctx
    report.phi_automaton = A_phi
    return report


def class_union(report: DecompositionReport) -> ta.TreeAutomaton:
    sigma = report.context.sigma
    if not report.classes:
        return ta.empty_automaton(sigma)
    # fold pairwise: one product over all classes grows exponentially
    return functools.reduce(ta.union, (c.automaton for c in report.classes))


def classes_disjoint(report: DecompositionReport) -> bool:
    autos = [c.automaton for c in report.classes]
    return all(ta.is_empty(ta.intersect(a, b)) for a, b in itertools.combinations(autos, 2))


def _elements(S: Presentation, budget: int, max_nodes: int = 8) -> list[Tree]:
    out: list[Tree] = []
    for size in range(1, max_nodes + 1):
        out = ta.enumerate_trees(S.universe, size)
        if len(out) >= budget:
            break
    return out[:budget]


def verify_box(report: DecompositionReport, entry: ClassEntry, budget: int = 200,
               seed: int = 0) -> VerificationResult:
    """Check on sampled elements that the box map is a bijection onto the
    class, that its sections are embeddings, and that the colouring by
    component states decides every relation."""
    ctx: TypeContext = report.context
    P = ctx.P
    st = entry.stype
    m = len(st.U)
    rng = np.random.default_rng(seed)
    checks = 0

    def fail(msg, **witness):
        res = VerificationResult(False, checks, {"reason": msg, **{
            k: (dumps(v).split() if isinstance(v, Tree) else
                [dumps(x).split() for x in v] if isinstance(v, (list, tuple)) and v and isinstance(v[0], Tree)
                else v) for k, v in witness.items()}})
        entry.verification = res
        return res

    if m == 0:
        t = entry.box_map([])
        checks += 1
        if not ta.accepts(entry.automaton, t) or ctx.stype(t) != st:
            return fail("class tree not in its own class", tree=t)
        entry.verification = VerificationResult(True, checks)
        return entry.verification

    elems = [_elements(c.structure, budget) for c in entry.components]
    if any(not e for e in elems):
        return fail("empty component")

    def sample_tuple():
        return [e[int(rng.integers(len(e)))] for e in elems]

    # (a) bijection onto the class
    seen: dict[Tree, tuple] = {}
    for _ in range(budget):
        xs = sample_tuple()
        t = entry.box_map(xs)
        checks += 1
        if not P.contains(t) or not ta.accepts(entry.automaton, t) or ctx.stype(t) != st:
            return fail("box map leaves the class", args=xs, image=t)
        if not ta.accepts(report.phi_automaton, convolve([t] + ctx.params)):
            return fail("class element violates φ", args=xs, image=t)
        key = tuple(xs)
        if t in seen and seen[t] != key:
            return fail("box map not injective", args=xs, other=list(seen[t]))
        seen[t] = key

    # (b) sections are embeddings; (c) colourings decide relations
    for k, name in enumerate(ctx.names[1:], 1):
        r = ctx.arity[k]
        A = ctx.autos[k]
        conv_tD = convolve([st.t_D] * r)
        for _ in range(budget):
            j = int(rng.integers(m))
            base = sample_tuple()
            ys = [elems[j][int(rng.integers(len(elems[j])))] for _ in range(r)]
            images = []
            for y in ys:
                xs = list(base)
                xs[j] = y
                images.append(entry.box_map(xs))
            lhs = P.holds(name, *images)
            comp = entry.components[j].structure
            rhs = comp.holds(name, *ys)
            checks += 1
            if lhs != rhs:
                return fail(f"section {j} is not an embedding for {name}", section_args=ys, base=base)
        for _ in range(budget):
            tuples = [sample_tuple() for _ in range(r)]
            images = [entry.box_map(xs) for xs in tuples]
            colour = {u: ta.run(A, convolve([xs[i] for xs in tuples])) for i, u in enumerate(st.U)}
            h = bool(A.accept[ta.run(A, conv_tD, rho=colour)])
            checks += 1
            if P.holds(name, *images) != h:
                return fail(f"colouring does not decide {name}", images=images)
    entry.verification = VerificationResult(True, checks)
    return entry.verification


def verify_report(report: DecompositionReport, budget: int = 200, seed: int = 0) -> bool:
    return all(verify_box(report, c, budget, seed).ok for c in report.classes)


# -- finite structures ---------------------------------------------------------

def _ordered(O: FiniteOrdering) -> list[int]:
    return sorted(range(len(O)), key=lambda i: int(O.le[:, i].sum()))


def check_sum_augmentation(A: FiniteOrdering, parts: Sequence[FiniteOrdering]) -> bool:
    """Is there a partition of A into blocks with ``A↾block_i ≅ parts[i]``?"""
    if sum(len(p) for p in parts) != len(A):
        return False
    n = len(A)
    sizes = [len(p) for p in parts]

    def assign(i, free):
        if i == len(parts):
            return not free
        for block in itertools.combinations(sorted(free), sizes[i]):
            sub = FiniteOrdering(block, A.le[np.ix_(block, block)])
            if _linear_iso(sub, parts[i]):
                if assign(i + 1, free - set(block)):
                    return True
        return False

    return assign(0, set(range(n)))


def _linear_iso(X: FiniteOrdering, Y: FiniteOrdering) -> bool:
    if len(X) != len(Y):
        return False
    ox, oy = _ordered(X), _ordered(Y)
    return all(bool(X.le[a, b]) == bool(Y.le[c, d])
               for (a, c), (b, d) in itertools.product(zip(ox, oy), repeat=2))


def check_box_augmentation(A: FiniteOrdering, parts: Sequence[FiniteOrdering]) -> bool:
    """Is there a bijection ``f: Π parts → A`` whose sections are embeddings?"""
    sizes = [len(p) for p in parts]
    if math.prod(sizes) != len(A):
        return False
    if len(A) == 0:
        return True
    domain = list(itertools.product(*(range(s) for s in sizes)))
    # only strictly increasing sections can be embeddings of linear orders, so
    # search over assignments in domain order with pruning on sections
    rank = [_ordered(p) for p in parts]
    pos = [{e: i for i, e in enumerate(r)} for r in rank]
    cells = [tuple(pos[j][x[j]] for j in range(len(x))) for x in domain]
    image: dict[tuple, int] = {}
    used = set()

    def consistent(cell, a):
        for j in range(len(cell)):
            for other, b in image.items():
                if all(other[i] == cell[i] for i in range(len(cell)) if i != j) and other[j] != cell[j]:
                    less = other[j] < cell[j]
                    if less != bool(A.le[b, a]):
                        return False
        return True

    def place(i):
        if i == len(cells):
            return True
        for a in range(len(A)):
            if a in used or not consistent(cells[i], a):
                continue
            image[cells[i]] = a
            used.add(a)
            if place(i + 1):
                return True
            del image[cells[i]]
            used.discard(a)
        return False

    return place(0)


def check_caruth_finite(A: FiniteOrdering, parts: Sequence[FiniteOrdering], mode: str = "sum") -> bool:
    """If A is a sum (box) augmentation of the parts then ``|A|`` is at most
    the natural sum (product) of their sizes."""
    if mode == "sum":
        holds = check_sum_augmentation(A, parts)
        bound = natural_sum_all(CNF.of(len(p)) for p in parts)
    elif mode == "box":
        holds = check_box_augmentation(A, parts)
        bound = natural_product_all(CNF.of(len(p)) for p in parts)
    else:
        raise ValueError("mode must be 'sum' or 'box'")
    return (not holds) or CNF.of(len(A)) <= bound
