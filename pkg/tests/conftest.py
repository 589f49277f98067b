import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hyperchain import HyperchainSystem, new_hyperchain

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def system(n, rated_edges):
    return HyperchainSystem.from_edges(n, rated_edges)


def graph(n, edges):
    return new_hyperchain(n, edges)


def brute_covers(n, edges):
    """Successor maps of all cycle covers, by trying every permutation."""
    es = set(edges)
    return [
        tuple(p[i] + 1 for i in range(n))
        for p in itertools.permutations(range(n))
        if all((i + 1, p[i] + 1) in es for i in range(n))
    ]


def brute_hamiltonian(n, edges):
    es = set(edges)
    if n == 1:
        return (1, 1) in es
    for rest in itertools.permutations(range(2, n + 1)):
        order = (1,) + rest
        if all((order[k], order[(k + 1) % n]) in es for k in range(n)):
            return True
    return False


def closure(n, edges):
    """Transitive closure by Floyd-Warshall on booleans."""
    R = np.eye(n, dtype=bool)
    for t, h in edges:
        R[t - 1, h - 1] = True
    for k in range(n):
        R |= R[:, k:k + 1] & R[k:k + 1, :]
    return R


def fd_jacobian(fun, z, step=1e-6):
    n = z.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (fun(z + e) - fun(z - e)) / (2 * step)
    return J


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_edges(rng, n, p=0.35, loops=0.15):
    """Edge list on n vertices with every vertex touched."""
    while True:
        A = rng.random((n, n)) < p
        A[np.diag_indices(n)] = rng.random(n) < loops
        edges = [(int(i) + 1, int(j) + 1) for i, j in np.argwhere(A)]
        touched = {v for e in edges for v in e}
        if edges and len(touched) == n:
            return edges


def edge_sets(max_n=6):
    """Hypothesis strategy for (n, edges) with no isolated vertex."""
    from hypothesis import strategies as st

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
        chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
        touched = {v for e in chosen for v in e}
        # give every untouched vertex an edge so the graph is valid
        for v in range(1, n + 1):
            if v not in touched:
                w = draw(st.integers(1, n))
                e = (v, w) if draw(st.booleans()) else (w, v)
                if e not in chosen:
                    chosen.append(e)
                touched |= set(e)
        return n, sorted(chosen)

    return build()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
