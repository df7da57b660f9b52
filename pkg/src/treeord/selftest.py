"""Seeded randomized consistency checks behind ``treeord selftest``."""

from __future__ import annotations

import numpy as np

from . import presentations as pr
from . import ranks as rk
from .ordinals import (CNF, ZERO, compare, natural_product, natural_sum, omega_power,
                       ordinary_sum)


def random_cnf(rng: np.random.Generator, max_exp_deg: int = 1, terms: int = 3,
               max_coeff: int = 4) -> CNF:
    """A random ordinal below ω^(ω^(max_exp_deg+1)) with at most ``terms`` terms;
    exponents are polynomials in ω of degree <= ``max_exp_deg``."""
    exps = set()
    for _ in range(int(rng.integers(0, terms + 1))):
        e = ZERO
        for d in range(max_exp_deg, -1, -1):
            c = int(rng.integers(0, 3))
            if c:
                e = ordinary_sum(e, omega_power(d, c))
        exps.add(e)
    ordered = sorted(exps, reverse=True)
    return CNF([(e, int(rng.integers(1, max_coeff + 1))) for e in ordered])


def _ordinal_laws(rng, rounds) -> int:
    bad = 0
    for _ in range(rounds):
        a, b, c = (random_cnf(rng) for _ in range(3))
        bad += natural_sum(a, b) != natural_sum(b, a)
        bad += natural_product(a, b) != natural_product(b, a)
        bad += natural_sum(natural_sum(a, b), c) != natural_sum(a, natural_sum(b, c))
        bad += natural_product(a, natural_sum(b, c)) != natural_sum(natural_product(a, b), natural_product(a, c))
        if c and compare(a, b) < 0:
            bad += not compare(natural_sum(a, c), natural_sum(b, c)) < 0
    return int(bad)


def _round_trip(rng, rounds) -> int:
    bad = 0
    for k in (1, 2):
        P = pr.build_omega_tower(k)
        for _ in range(rounds):
            a = random_cnf(rng, max_exp_deg=k - 1)
            bad += P.decode(P.encode(a)) != a
    return bad


def _derivative_oracle(rng, rounds) -> int:
    bad = 0
    for _ in range(rounds):
        T = rk.RegularBinaryTree(rk.random_prefix_closed_dfa(rng))
        d = rk.derivative(T)
        for w in T.sample_words(5):
            bad += (w in d) != rk.in_derivative_reference(T, w)
    return bad


def run(seed: int = 0, rounds: int = 50) -> dict[str, int]:
    rng = np.random.default_rng(seed)
    return {
        "ordinal-laws": _ordinal_laws(rng, rounds),
        "encode-decode": _round_trip(rng, rounds),
        "derivative-oracle": _derivative_oracle(rng, rounds),
    }
