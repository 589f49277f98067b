"""Hyperchains, rate matrices and the systems built from them.

Vertices are numbered 1..n everywhere a user can see them. An edge
``(i, j)`` is the catalytic influence X_i ⇢ X_j, i.e. the reaction
X_j + X_i -> 2 X_j + X_i, and its rate constant lives at ``K[i-1, j-1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class HyperchainError(ValueError):
    """Base class for invalid hyperchain input."""


class EmptyEdgeSet(HyperchainError):
    pass


class IsolatedVertex(HyperchainError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has no incident edge")
        self.vertex = vertex


class IndexOutOfRange(HyperchainError):
    pass


class DuplicateEdge(HyperchainError):
    def __init__(self, edge: Edge):
        super().__init__(f"duplicate edge {edge[0]}->{edge[1]}")
        self.edge = edge


class SupportMismatch(HyperchainError):
    """Rate matrix support differs from the edge set."""


class NotASubgraph(HyperchainError):
    pass


class EmptySubset(HyperchainError):
    pass


def _normalize_edges(n: int, edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    if n < 1:
        raise IndexOutOfRange(f"species count must be positive, got {n}")
    seen: set[Edge] = set()
    for e in edges:
        tail, head = int(e[0]), int(e[1])
        if not (1 <= tail <= n and 1 <= head <= n):
            raise IndexOutOfRange(f"edge {tail}->{head} outside 1..{n}")
        if (tail, head) in seen:
            raise DuplicateEdge((tail, head))
        seen.add((tail, head))
    return tuple(sorted(seen))


def _adjacency(n: int, edges: tuple[Edge, ...]) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.int8)
    for tail, head in edges:
        a[tail - 1, head - 1] = 1
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class _Digraph:
    n: int
    edges: tuple[Edge, ...]

    @cached_property
    def adjacency(self) -> np.ndarray:
        return _adjacency(self.n, self.edges)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """0-based successor lists, sorted."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for tail, head in self.edges:
            out[tail - 1].append(head - 1)
        return tuple(tuple(sorted(o)) for o in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for tail, head in self.edges:
            inn[head - 1].append(tail - 1)
        return tuple(tuple(sorted(i)) for i in inn)

    def has_edge(self, tail: int, head: int) -> bool:
        return (tail, head) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def isolated_vertices(self) -> list[int]:
        touched = {v for e in self.edges for v in e}
        return [v for v in range(1, self.n + 1) if v not in touched]


@dataclass(frozen=True)
class Hyperchain(_Digraph):
    """A validated catalytic influence network on ``n`` species.

    Use :func:`new_hyperchain` to build one from user input.
    """

    def __post_init__(self):
        if not self.edges:
            raise EmptyEdgeSet("a hyperchain needs at least one edge")
        iso = self.isolated_vertices()
        if iso:
            raise IsolatedVertex(iso[0])

    @property
    def degenerate(self) -> bool:
        return False


@dataclass(frozen=True)
class DegenerateNetwork(_Digraph):
    """Induced network that has an isolated vertex (possibly no edges at all).

    Not a hyperchain, but still carries a well defined replicator system.
    """

    @property
    def degenerate(self) -> bool:
        return True


Network = Hyperchain | DegenerateNetwork


def new_hyperchain(n: int, edges: Iterable[Sequence[int]]) -> Hyperchain:
    """Validate ``edges`` (1-indexed ``(tail, head)`` pairs) and build a hyperchain."""
    return Hyperchain(n, _normalize_edges(n, edges))


def adjacency_matrix(h: _Digraph) -> np.ndarray:
    return h.adjacency


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class HyperchainSystem:
    """A network paired with a nonnegative rate matrix whose support is the edge set."""

    graph: Network
    K: np.ndarray = field(repr=False)

    def __post_init__(self):
        K = _frozen(self.K)
        n = self.graph.n
        if K.shape != (n, n):
            raise SupportMismatch(f"rate matrix shape {K.shape} does not match n={n}")
        if not np.all(np.isfinite(K)) or np.any(K < 0):
            raise SupportMismatch("rates must be finite and nonnegative")
        support = K > 0
        if not np.array_equal(support, self.graph.adjacency.astype(bool)):
            bad = np.argwhere(support != self.graph.adjacency.astype(bool))[0] + 1
            raise SupportMismatch(f"rate support differs from edge set at ({bad[0]}, {bad[1]})")
        object.__setattr__(self, "K", K)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def degenerate(self) -> bool:
        return self.graph.degenerate

    @classmethod
    def from_edges(cls, n: int, rated_edges: Iterable[Sequence[float]]) -> "HyperchainSystem":
        """Build from ``(tail, head, rate)`` triples."""
        rated_edges = list(rated_edges)
        h = new_hyperchain(n, [(int(t), int(hd)) for t, hd, _ in rated_edges])
        K = np.zeros((n, n))
        for t, hd, r in rated_edges:
            if not r > 0:
                raise SupportMismatch(f"edge {int(t)}->{int(hd)} needs a positive rate, got {r}")
            K[int(t) - 1, int(hd) - 1] = float(r)
        return cls(h, K)

    def rated_edges(self) -> list[tuple[int, int, float]]:
        return [(t, h, float(self.K[t - 1, h - 1])) for t, h in self.graph.edges]


def with_rates(h: Network, K: np.ndarray) -> HyperchainSystem:
    return HyperchainSystem(h, K)


def unit_rates(h: Network) -> HyperchainSystem:
    return HyperchainSystem(h, h.adjacency.astype(float))


def restrict_rates(K: np.ndarray, sub: _Digraph) -> np.ndarray:
    """Entrywise product of ``K`` with the adjacency of the subgraph ``sub``."""
    K = np.asarray(K, dtype=float)
    A = sub.adjacency
    if K.shape != A.shape:
        raise NotASubgraph(f"shape mismatch {K.shape} vs {A.shape}")
    outside = (A > 0) & ~(K > 0)
    if outside.any():
        t, h = np.argwhere(outside)[0] + 1
        raise NotASubgraph(f"edge {t}->{h} is not in the parent graph")
    return _frozen(K * A)


@dataclass(frozen=True)
class InducedNetwork:
    """Induced subnetwork plus ``vertex_map[k]`` = parent label of local vertex ``k+1``."""

    network: Network
    vertex_map: tuple[int, ...]


def _induced_edges(h: _Digraph, vs: Iterable[int]) -> tuple[tuple[int, ...], list[Edge]]:
    keep = tuple(sorted(set(int(v) for v in vs)))
    if not keep:
        raise EmptySubset("induced subnetwork needs at least one vertex")
    if keep[0] < 1 or keep[-1] > h.n:
        raise IndexOutOfRange(f"vertex subset {keep} outside 1..{h.n}")
    local = {v: k + 1 for k, v in enumerate(keep)}
    edges = [(local[t], local[hd]) for t, hd in h.edges if t in local and hd in local]
    return keep, edges


def induced_subnetwork(h: _Digraph, vs: Iterable[int]) -> InducedNetwork:
    keep, edges = _induced_edges(h, vs)
    edges_t = tuple(sorted(edges))
    probe = DegenerateNetwork(len(keep), edges_t)
    if edges_t and not probe.isolated_vertices():
        return InducedNetwork(Hyperchain(len(keep), edges_t), keep)
    return InducedNetwork(probe, keep)


@dataclass(frozen=True)
class InducedSystem:
    system: HyperchainSystem
    vertex_map: tuple[int, ...]

    def embed(self, local_point: np.ndarray, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[np.asarray(self.vertex_map) - 1] = local_point
        return x


def induced_system(sys: HyperchainSystem, vs: Iterable[int]) -> InducedSystem:
    sub = induced_subnetwork(sys.graph, vs)
    idx = np.asarray(sub.vertex_map) - 1
    return InducedSystem(HyperchainSystem(sub.network, sys.K[np.ix_(idx, idx)]), sub.vertex_map)
