"""Hopcroft-Karp maximum bipartite matching."""

from collections import deque
from typing import Sequence

_INF = float("inf")


def max_matching(n_left: int, n_right: int, adj: Sequence[Sequence[int]]) -> list[int]:
    """Return ``match_left`` where ``match_left[u]`` is the right vertex paired with
    ``u`` or -1. ``adj[u]`` lists the right neighbours of left vertex ``u``."""
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = _INF
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l


def has_perfect_matching(n: int, adj: Sequence[Sequence[int]]) -> bool:
    return all(v >= 0 for v in max_matching(n, n, adj))
