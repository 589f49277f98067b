"""Positive and boundary equilibria of the relative (replicator) system.

Interior equilibria are the points x of the open simplex with
``K^T x = (x^T K^T x) 1``. They are found by solving ``K^T z = 1`` and
normalising, since z is a positive solution exactly when ``z / sum(z)`` is a
positive equilibrium.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._field import equilibrium_residual
from .analysis import initial_and_terminal_nodes, smallest_spanning_linear_subgraph, TooLarge
from .graph import (
    HyperchainError,
    HyperchainSystem,
    Hyperchain,
    induced_system,
    with_rates,
)

RANK_RTOL = 1e-10
POSITIVE_TOL = 1e-12
CONSISTENCY_TOL = 1e-9
BOUNDARY_BOUND = 14
MAX_VERTEX_DIM = 3


class RootedGraph(HyperchainError):
    pass


class NoSpanningLinearSubgraph(HyperchainError):
    pass


class Kind(str, enum.Enum):
    EMPTY = "Empty"
    UNIQUE = "Unique"
    CONTINUUM = "Continuum"


@dataclass(frozen=True, eq=False)
class EquilibriumSet:
    """Positive equilibria of one system.

    For a continuum, ``point`` is an interior point (the one maximising the
    smallest coordinate), ``basis`` holds orthonormal directions spanning the
    set inside the simplex, and ``vertices`` lists the corners of its closure
    when the dimension is at most 3. For a one-dimensional continuum
    ``interval`` gives the closed parameter range ``point + t * basis[:, 0]``.
    """

    kind: Kind
    point: np.ndarray | None = None
    basis: np.ndarray | None = None
    interval: tuple[float, float] | None = None
    vertices: np.ndarray | None = None
    residual: float = 0.0
    rank: int | None = None
    warnings: tuple[str, ...] = ()

    @property
    def dimension(self) -> int:
        if self.kind is Kind.EMPTY:
            return -1
        return 0 if self.basis is None else self.basis.shape[1]

    def points(self) -> list[np.ndarray]:
        """Reported points: the unique point, or a continuum's interior point and corners."""
        if self.point is None:
            return []
        pts = [self.point]
        if self.vertices is not None:
            pts += list(self.vertices)
        return pts

    def to_dict(self) -> dict:
        from .report import vec

        d = {"classification": self.kind.value, "residual": self.residual, "warnings": list(self.warnings)}
        if self.point is not None:
            d["point"] = vec(self.point)
        if self.basis is not None:
            d["basis"] = [vec(b) for b in self.basis.T]
        if self.interval is not None:
            d["interval"] = list(self.interval)
        if self.vertices is not None:
            d["vertices"] = [vec(v) for v in self.vertices]
        return d


def _null_space(M: np.ndarray, rtol: float = RANK_RTOL) -> tuple[np.ndarray, int]:
    u, s, vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vt[rank:].T, rank


def _orthonormal_simplex_directions(n: int) -> np.ndarray:
    ns, _ = _null_space(np.ones((1, n)))
    return ns


def _polytope_vertices(point: np.ndarray, basis: np.ndarray) -> np.ndarray | None:
    """Corners of {point + basis c >= 0} by brute force over active coordinate sets."""
    n, k = basis.shape
    if k > MAX_VERTEX_DIM:
        return None
    verts: list[np.ndarray] = []
    for active in itertools.combinations(range(n), k):
        B = basis[list(active)]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        c = np.linalg.solve(B, -point[list(active)])
        v = point + basis @ c
        if v.min() < -1e-10:
            continue
        v = np.clip(v, 0.0, None)
        v /= v.sum()
        if not any(np.allclose(v, w, atol=1e-10) for w in verts):
            verts.append(v)
    verts.sort(key=lambda v: tuple(-v))
    return np.array(verts) if verts else None


def _continuum(K: np.ndarray, span: np.ndarray, rank: int, warnings: list[str]) -> EquilibriumSet:
    """Positive part of the simplex slice through the linear span ``span`` (columns)."""
    n, m = span.shape
    # maximise s subject to span @ w >= s, sum(span @ w) = 1
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-span, np.ones((n, 1))])
    A_eq = np.hstack([span.sum(axis=0, keepdims=True), np.zeros((1, 1))])
    res = linprog(
        c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
        bounds=[(None, None)] * m + [(None, 1.0)], method="highs",
    )
    if res.status != 0 or -res.fun <= POSITIVE_TOL:
        if res.status == 0 and -res.fun > 0:
            warnings.append("NearDegenerate")
        return EquilibriumSet(Kind.EMPTY, rank=rank, warnings=tuple(warnings))
    x = span @ res.x[:m]
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    # directions inside the slice: sum-zero vectors of the span
    coef, _ = _null_space(span.sum(axis=0, keepdims=True))
    D = span @ coef
    if D.size:
        u, s, _ = np.linalg.svd(D, full_matrices=False)
        basis = u[:, s > 1e-10 * max(1.0, s.max())]
    else:
        basis = np.zeros((n, 0))
    for j in range(basis.shape[1]):
        # deterministic orientation: first nonzero entry positive
        col = basis[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            basis[:, j] = -col
    interval = None
    if basis.shape[1] == 1:
        d = basis[:, 0]
        lo = max((-x[i] / d[i] for i in range(n) if d[i] > 1e-14), default=-np.inf)
        hi = min((-x[i] / d[i] for i in range(n) if d[i] < -1e-14), default=np.inf)
        interval = (float(lo), float(hi))
    verts = _polytope_vertices(x, basis)
    pts = [x] + ([] if verts is None else list(verts))
    resid = max(equilibrium_residual(K, p) for p in pts)
    return EquilibriumSet(Kind.CONTINUUM, x, basis, interval, verts, resid, rank, tuple(warnings))


def positive_equilibria(sys: HyperchainSystem) -> EquilibriumSet:
    """Classify the positive equilibria of ``sys`` as Empty, Unique or Continuum.

    A network without edges has a vanishing vector field, so every point of the
    simplex is an equilibrium (a single point when n = 1). A network with edges
    and an isolated vertex has none.
    """
    K = sys.K
    n = sys.n
    if not K.any():
        if n == 1:
            return EquilibriumSet(Kind.UNIQUE, np.ones(1), rank=0)
        return _continuum(K, np.eye(n), 0, [])
    Kt = K.T
    u, s, vt = np.linalg.svd(Kt)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    ones = np.ones(n)
    warnings: list[str] = []
    if rank == n:
        z = np.linalg.solve(Kt, ones)
        total = z.sum()
        if total <= 0:
            return EquilibriumSet(Kind.EMPTY, rank=rank)
        x = z / total
        if x.min() <= 0:
            return EquilibriumSet(Kind.EMPTY, rank=rank)
        if x.min() <= POSITIVE_TOL:
            return EquilibriumSet(Kind.EMPTY, rank=rank, warnings=("NearDegenerate",))
        return EquilibriumSet(Kind.UNIQUE, x, residual=equilibrium_residual(K, x), rank=rank)
    # singular: affine solution set z_p + ker(K^T), if consistent
    z_p = vt[:rank].T @ ((u[:, :rank].T @ ones) / s[:rank])
    if np.max(np.abs(Kt @ z_p - ones)) > CONSISTENCY_TOL * max(1.0, np.abs(z_p).max()):
        return EquilibriumSet(Kind.EMPTY, rank=rank)
    kernel = vt[rank:].T
    return _continuum(K, np.hstack([z_p[:, None], kernel]), rank, warnings)


@dataclass(frozen=True, eq=False)
class BoundaryEquilibrium:
    """A positive equilibrium of the subsystem living on the face where ``face`` vanishes.

    ``face`` and ``support`` are 1-based and complementary. For a continuum face
    ``point`` is a representative and ``induced`` carries the full description.
    """

    face: tuple[int, ...]
    support: tuple[int, ...]
    point: np.ndarray
    induced_point: np.ndarray
    induced: EquilibriumSet = field(repr=False)

    @property
    def continuum(self) -> bool:
        return self.induced.kind is Kind.CONTINUUM

    def to_dict(self) -> dict:
        from .report import vec

        return {
            "face": list(self.face),
            "support": list(self.support),
            "point": vec(self.point),
            "classification": self.induced.kind.value,
            "induced": self.induced.to_dict(),
        }


def boundary_equilibria(sys: HyperchainSystem, bound: int = BOUNDARY_BOUND) -> list[BoundaryEquilibrium]:
    """Equilibria on every proper face of the simplex, ordered by the zero set."""
    n = sys.n
    if n > bound:
        raise TooLarge(n, bound)
    out = []
    everyone = range(1, n + 1)
    for size in range(1, n):
        for face in itertools.combinations(everyone, size):
            support = tuple(v for v in everyone if v not in face)
            sub = induced_system(sys, support)
            eq = positive_equilibria(sub.system)
            if eq.kind is Kind.EMPTY:
                continue
            out.append(BoundaryEquilibrium(face, support, sub.embed(eq.point, n), eq.point, eq))
    out.sort(key=lambda b: b.face)
    return out


def construct_existence_rates(h: Hyperchain) -> np.ndarray:
    """Rates ``k_ji = 1 / indegree(i)`` that make the barycentre an equilibrium."""
    initial, _ = initial_and_terminal_nodes(h)
    if initial:
        raise RootedGraph(f"initial nodes {sorted(initial)} have no incoming edge")
    indeg = np.array([len(i) for i in h.in_neighbors], dtype=float)
    K = h.adjacency / indeg[None, :]
    x = np.full(h.n, 1.0 / h.n)
    resid = equilibrium_residual(K, x)
    assert resid <= 1e-12, resid
    K.flags.writeable = False
    return K


def construct_uniqueness_rates(h: Hyperchain, epsilon: float = 1e-3) -> np.ndarray:
    """Rate 1 along a spanning linear subgraph and ``epsilon`` on every other edge."""
    cover = smallest_spanning_linear_subgraph(h)
    if cover is None:
        raise NoSpanningLinearSubgraph("graph has no spanning linear subgraph")
    K = h.adjacency * float(epsilon)
    for t, hd in cover.edges:
        K[t - 1, hd - 1] = 1.0
    K.flags.writeable = False
    return K


def uniqueness_system(h: Hyperchain, epsilon: float = 1e-3) -> HyperchainSystem:
    return with_rates(h, construct_uniqueness_rates(h, epsilon))
