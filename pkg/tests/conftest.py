import pytest
from hypothesis import HealthCheck, settings, strategies as st

from treeord import presentations as pr
from treeord.ordinals import CNF, ZERO, omega_power, ordinary_sum
from treeord.trees import Tree

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def trees(draw, alphabet=("a", "b"), max_nodes=6):
    """Random trees grown one boundary node at a time."""
    n = draw(st.integers(0, max_nodes))
    labels = {}
    frontier = [""]
    for _ in range(n):
        u = frontier.pop(draw(st.integers(0, len(frontier) - 1)))
        labels[u] = draw(st.sampled_from(alphabet))
        frontier += [u + "0", u + "1"]
    return Tree(labels)


@st.composite
def small_exponents(draw, degree=1):
    """Exponents below ω^(degree+1), as ω^degree·c_degree + ... + c_0."""
    e = ZERO
    for d in range(degree, -1, -1):
        c = draw(st.integers(0, 3))
        if c:
            e = ordinary_sum(e, omega_power(d, c))
    return e


@st.composite
def cnfs(draw, degree=1, max_terms=3, max_coeff=5):
    """Random CNF ordinals whose exponents lie below ω^(degree+1)."""
    exps = draw(st.sets(small_exponents(degree), max_size=max_terms))
    ordered = sorted(exps, reverse=True)
    return CNF([(e, draw(st.integers(1, max_coeff))) for e in ordered])


@pytest.fixture(scope="session")
def omega():
    return pr.build_omega_tower(0)


@pytest.fixture(scope="session")
def tower1():
    return pr.build_omega_tower(1)


@pytest.fixture(scope="session")
def tower2():
    return pr.build_omega_tower(2)


# one summary line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
