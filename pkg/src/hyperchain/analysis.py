"""Graph-theoretic classifiers for hyperchains.

Two different notions of "cyclic" show up in the dynamics: :func:`is_acyclic`
asks whether the graph has any directed cycle at all (self-loops count), while
:func:`is_cycle_graph` asks whether the whole edge set is one directed cycle
through every vertex, i.e. whether the network is a hypercycle.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._matching import has_perfect_matching
from .graph import HyperchainError, _Digraph

ENUMERATION_BOUND = 12
HAMILTONIAN_BOUND = 20
HAMILTONIAN_BUDGET = 10_000_000


class TooLarge(HyperchainError):
    def __init__(self, n: int, bound: int):
        super().__init__(f"n={n} exceeds the bound {bound}")
        self.n = n
        self.bound = bound


class HamiltonianSearchInconclusive(HyperchainError):
    """The backtracking search ran out of its node budget."""


class NotLinear(HyperchainError):
    pass


class Parity(str, enum.Enum):
    EVEN = "Even"
    ODD = "Odd"


@dataclass(frozen=True)
class LinearSubgraph:
    """A spanning cycle cover. ``successor[i-1]`` is the head of the edge leaving ``i``."""

    n: int
    successor: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...] = field(init=False)
    parity: Parity = field(init=False)

    def __post_init__(self):
        if sorted(self.successor) != list(range(1, self.n + 1)):
            raise NotLinear("successor map is not a permutation of 1..n")
        seen = [False] * (self.n + 1)
        cycles = []
        for start in range(1, self.n + 1):
            if seen[start]:
                continue
            cyc = []
            v = start
            while not seen[v]:
                seen[v] = True
                cyc.append(v)
                v = self.successor[v - 1]
            cycles.append(tuple(cyc))
        n_even = sum(1 for c in cycles if len(c) % 2 == 0)
        object.__setattr__(self, "cycles", tuple(cycles))
        object.__setattr__(self, "parity", Parity.ODD if n_even % 2 else Parity.EVEN)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((i + 1, s) for i, s in enumerate(self.successor))

    @property
    def sign(self) -> int:
        """Sign of this cover's term in the determinant expansion of the adjacency matrix."""
        return 1 if self.parity is Parity.EVEN else -1

    @property
    def n_even_cycles(self) -> int:
        return sum(1 for c in self.cycles if len(c) % 2 == 0)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for t, h in self.edges:
            a[t - 1, h - 1] = 1
        return a

    def to_dict(self) -> dict:
        return {
            "edges": [list(e) for e in self.edges],
            "cycles": [list(c) for c in self.cycles],
            "parity": self.parity.value,
        }


def initial_and_terminal_nodes(h: _Digraph) -> tuple[frozenset[int], frozenset[int]]:
    """Vertices without incoming edges and vertices without outgoing edges (1-based).

    A self-loop counts as both an incoming and an outgoing edge.
    """
    initial = frozenset(v + 1 for v in range(h.n) if not h.in_neighbors[v])
    terminal = frozenset(v + 1 for v in range(h.n) if not h.out_neighbors[v])
    return initial, terminal


def is_rooted(h: _Digraph) -> bool:
    return bool(initial_and_terminal_nodes(h)[0])


def _reach(n: int, nbrs: Sequence[Sequence[int]], src: int) -> list[bool]:
    seen = [False] * n
    seen[src] = True
    q = deque([src])
    while q:
        u = q.popleft()
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                q.append(v)
    return seen


def is_strongly_connected(h: _Digraph) -> bool:
    if h.n == 1:
        return True
    return all(_reach(h.n, h.out_neighbors, 0)) and all(_reach(h.n, h.in_neighbors, 0))


def strongly_connected_components(h: _Digraph) -> list[list[int]]:
    """Components as sorted 1-based vertex lists, ordered by smallest member."""
    comp = [-1] * h.n
    out = []
    for v in range(h.n):
        if comp[v] >= 0:
            continue
        fwd = _reach(h.n, h.out_neighbors, v)
        bwd = _reach(h.n, h.in_neighbors, v)
        members = [u for u in range(h.n) if fwd[u] and bwd[u]]
        for u in members:
            comp[u] = len(out)
        out.append([u + 1 for u in members])
    return out


def is_acyclic(h: _Digraph) -> bool:
    indeg = [len(i) for i in h.in_neighbors]
    q = deque(v for v in range(h.n) if indeg[v] == 0)
    removed = 0
    while q:
        u = q.popleft()
        removed += 1
        for v in h.out_neighbors[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                q.append(v)
    return removed == h.n


def has_spanning_linear_subgraph(h: _Digraph) -> bool:
    # a cycle cover is a perfect matching between tail copies and head copies
    return has_perfect_matching(h.n, h.out_neighbors)


def enumerate_spanning_linear_subgraphs(
    h: _Digraph, cap: int | None = None, bound: int = ENUMERATION_BOUND
) -> list[LinearSubgraph]:
    """All cycle covers in lexicographic order of the successor map.

    Without ``cap`` the graph must have at most ``bound`` vertices; with ``cap``
    the search stops after that many covers.
    """
    if cap is None and h.n > bound:
        raise TooLarge(h.n, bound)
    n = h.n
    succ = [0] * n
    used = [False] * n
    found: list[LinearSubgraph] = []

    def rec(i: int) -> bool:
        if i == n:
            found.append(LinearSubgraph(n, tuple(s + 1 for s in succ)))
            return cap is not None and len(found) >= cap
        for v in h.out_neighbors[i]:
            if not used[v]:
                used[v] = True
                succ[i] = v
                if rec(i + 1):
                    return True
                used[v] = False
        return False

    if has_spanning_linear_subgraph(h):
        rec(0)
    return found


def smallest_spanning_linear_subgraph(h: _Digraph) -> LinearSubgraph | None:
    covers = enumerate_spanning_linear_subgraphs(h, cap=1)
    return covers[0] if covers else None


def find_hamiltonian_cycle(
    h: _Digraph, bound: int = HAMILTONIAN_BOUND, budget: int = HAMILTONIAN_BUDGET
) -> list[int] | None:
    """Lexicographically smallest Hamiltonian cycle starting at vertex 1, or None.

    Raises :class:`HamiltonianSearchInconclusive` when the search exceeds
    ``budget`` recursion steps.
    """
    n = h.n
    if n > bound:
        raise TooLarge(n, bound)
    if n == 1:
        return [1] if h.has_edge(1, 1) else None
    if not is_strongly_connected(h):
        return None
    out = [[v for v in o if v != u] for u, o in enumerate(h.out_neighbors)]
    inn = [[v for v in i if v != u] for u, i in enumerate(h.in_neighbors)]
    path = [0]
    on_path = [False] * n
    on_path[0] = True
    steps = 0

    def feasible(cur: int) -> bool:
        # every vertex still to visit needs a way in and a way out
        for u in range(n):
            if on_path[u]:
                continue
            if not any(not on_path[w] or w == cur for w in inn[u]):
                return False
            if not any(not on_path[w] or w == 0 for w in out[u]):
                return False
        return True

    def rec(cur: int) -> bool:
        nonlocal steps
        steps += 1
        if steps > budget:
            raise HamiltonianSearchInconclusive(f"search exceeded {budget} steps")
        if len(path) == n:
            return 0 in out[cur]
        for v in out[cur]:
            if on_path[v]:
                continue
            on_path[v] = True
            path.append(v)
            if feasible(v) and rec(v):
                return True
            path.pop()
            on_path[v] = False
        return False

    return [v + 1 for v in path] if rec(0) else None


def is_hamiltonian(h: _Digraph) -> bool:
    return find_hamiltonian_cycle(h) is not None


def is_cycle_graph(h: _Digraph) -> bool:
    """True when the edges form exactly one directed cycle through all vertices."""
    if len(h.edges) != h.n:
        return False
    if any(len(o) != 1 for o in h.out_neighbors) or any(len(i) != 1 for i in h.in_neighbors):
        return False
    return is_strongly_connected(h)


def linear_digraph_adjacency_checks(d: LinearSubgraph | _Digraph) -> bool:
    """Check that ``A(D)^T 1 = 1`` and ``A(D)^T e_i = e_succ(i)`` for a linear digraph."""
    if isinstance(d, LinearSubgraph):
        A = d.adjacency().astype(float)
        succ = d.successor
    else:
        if any(len(o) != 1 for o in d.out_neighbors) or any(len(i) != 1 for i in d.in_neighbors):
            raise NotLinear("every vertex needs in- and outdegree exactly 1")
        A = d.adjacency.astype(float)
        succ = tuple(o[0] + 1 for o in d.out_neighbors)
    n = A.shape[0]
    ones = np.ones(n)
    if not np.array_equal(A.T @ ones, ones):
        return False
    eye = np.eye(n)
    return all(np.array_equal(A.T @ eye[i], eye[succ[i] - 1]) for i in range(n))


@dataclass(frozen=True)
class GraphProfile:
    initial_nodes: tuple[int, ...]
    terminal_nodes: tuple[int, ...]
    is_rooted: bool
    strongly_connected: bool
    acyclic: bool
    has_spanning_linear_subgraph: bool
    hamiltonian: bool | None
    is_cycle_graph: bool
    spanning_linear_subgraphs: tuple[LinearSubgraph, ...] | None = None

    @property
    def same_parity(self) -> bool | None:
        """Whether all enumerated cycle covers share one parity (None if not enumerated)."""
        if self.spanning_linear_subgraphs is None:
            return None
        return len({s.parity for s in self.spanning_linear_subgraphs}) <= 1

    def to_dict(self) -> dict:
        d = {
            "initial_nodes": list(self.initial_nodes),
            "terminal_nodes": list(self.terminal_nodes),
            "is_rooted": self.is_rooted,
            "strongly_connected": self.strongly_connected,
            "acyclic": self.acyclic,
            "has_spanning_linear_subgraph": self.has_spanning_linear_subgraph,
            "hamiltonian": self.hamiltonian,
            "is_cycle_graph": self.is_cycle_graph,
            "spanning_linear_subgraphs": None,
        }
        if self.spanning_linear_subgraphs is not None:
            d["spanning_linear_subgraphs"] = [s.to_dict() for s in self.spanning_linear_subgraphs]
        return d


def profile(h: _Digraph, enumerate_covers: bool = True) -> GraphProfile:
    init, term = initial_and_terminal_nodes(h)
    try:
        ham = is_hamiltonian(h)
    except (TooLarge, HamiltonianSearchInconclusive):
        ham = None
    covers = None
    if enumerate_covers and h.n <= ENUMERATION_BOUND:
        covers = tuple(enumerate_spanning_linear_subgraphs(h))
    return GraphProfile(
        initial_nodes=tuple(sorted(init)),
        terminal_nodes=tuple(sorted(term)),
        is_rooted=bool(init),
        strongly_connected=is_strongly_connected(h),
        acyclic=is_acyclic(h),
        has_spanning_linear_subgraph=has_spanning_linear_subgraph(h),
        hamiltonian=ham,
        is_cycle_graph=is_cycle_graph(h),
        spanning_linear_subgraphs=covers,
    )
