"""Instance generators: hypercycles, random networks and the two worked examples."""

from __future__ import annotations

import numpy as np

from .graph import Hyperchain, HyperchainSystem, IsolatedVertex, new_hyperchain, unit_rates, with_rates

RATE_LO = 0.1
RATE_HI = 10.0


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def cycle(n: int) -> Hyperchain:
    """The hypercycle 1 -> 2 -> ... -> n -> 1 (a self-loop when n = 1)."""
    return new_hyperchain(n, [(i, i % n + 1) for i in range(1, n + 1)])


def cycle_system(n: int, rates=None) -> HyperchainSystem:
    h = cycle(n)
    if rates is None:
        return unit_rates(h)
    # rates[i-1] belongs to the edge leaving vertex i
    K = np.zeros((n, n))
    for i, r in enumerate(rates, start=1):
        K[i - 1, i % n] = r
    return with_rates(h, K)


def random_rates(h: Hyperchain, seed=None, lo: float = RATE_LO, hi: float = RATE_HI) -> np.ndarray:
    """Log-uniform rates in ``[lo, hi]`` on every edge of ``h``."""
    rng = rng_from(seed)
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(h.n, h.n)))
    return r * h.adjacency


def random_system(h: Hyperchain, seed=None, lo: float = RATE_LO, hi: float = RATE_HI) -> HyperchainSystem:
    return with_rates(h, random_rates(h, seed, lo, hi))


def _valid(n: int, edges) -> Hyperchain | None:
    if not edges:
        return None
    try:
        return new_hyperchain(n, edges)
    except IsolatedVertex:
        return None


def random_hyperchain(n: int, seed=None, p: float | None = None, self_loops: float = 0.1) -> Hyperchain:
    """Each ordered pair i != j is an edge with probability ``p`` (random in
    [0.15, 0.6] if omitted); each self-loop with probability ``self_loops``.
    Resamples until no vertex is isolated."""
    rng = rng_from(seed)
    while True:
        q = rng.uniform(0.15, 0.6) if p is None else p
        edges = [
            (i, j)
            for i in range(1, n + 1)
            for j in range(1, n + 1)
            if rng.random() < (self_loops if i == j else q)
        ]
        h = _valid(n, edges)
        if h is not None:
            return h


def random_dag(n: int, seed=None, p: float = 0.5) -> Hyperchain:
    """Random acyclic hyperchain: edges only go forward in a random vertex order.

    Needs n >= 2, since a single vertex can only be covered by a self-loop.
    """
    if n < 2:
        raise ValueError("an acyclic hyperchain needs at least two species")
    rng = rng_from(seed)
    while True:
        order = rng.permutation(n) + 1
        edges = [
            (int(order[a]), int(order[b]))
            for a in range(n)
            for b in range(a + 1, n)
            if rng.random() < p
        ]
        h = _valid(n, edges)
        if h is not None:
            return h


def hamiltonian_plus_chords(n: int, seed=None, p: float | None = None) -> Hyperchain:
    """A randomly labelled Hamiltonian cycle plus random extra edges (self-loops included)."""
    rng = rng_from(seed)
    q = rng.uniform(0.05, 0.4) if p is None else p
    perm = [int(v) + 1 for v in rng.permutation(n)]
    ring = {(perm[k], perm[(k + 1) % n]) for k in range(n)}
    extra = {
        (i, j)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
        if (i, j) not in ring and rng.random() < q
    }
    return new_hyperchain(n, sorted(ring | extra))


def example_five(k3: float = 0.5, k5: float = 2.0) -> HyperchainSystem:
    """Five species: a 5-cycle 1->2->3->4->5->1 plus 3->1 and 5->4.

    Rate ``k3`` sits on 3->4 and ``k5`` on 5->4; every other rate is 1.
    """
    return HyperchainSystem.from_edges(
        5,
        [(3, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, k3), (4, 5, 1.0), (5, 4, k5), (5, 1, 1.0)],
    )


EXAMPLE_SIX_EDGES = (
    (1, 2, 1.0), (2, 1, 2.0), (2, 3, 3.0), (3, 4, 1.0), (4, 3, 1.0),
    (4, 5, 3.0), (5, 6, 2.0), (6, 5, 1.0), (6, 2, 3.0), (5, 1, 1.0),
)


def example_six() -> HyperchainSystem:
    """Strongly connected, non-Hamiltonian 6-species network that is still permanent."""
    return HyperchainSystem.from_edges(6, EXAMPLE_SIX_EDGES)
