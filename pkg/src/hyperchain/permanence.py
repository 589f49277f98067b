"""Numeric permanence testing and the constructive rate recipes around it.

A system is permanent when some delta > 0 bounds ``liminf min_i x_i(t)`` from
below for every interior start. No finite computation proves that, so the
test here returns a verdict: ``LikelyPermanent``, ``NotPermanent`` with a
witness, or ``Inconclusive``.

The numeric part integrates the relative system in log coordinates from a
battery of near-boundary starts, all stacked into one state so they share the
integrator. Log coordinates keep species that sit at 1e-10 or lower
resolvable, which matters because some permanent systems have attractors that
come very close to the boundary.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from ._rk import dopri5
from .analysis import (
    find_hamiltonian_cycle,
    is_cycle_graph,
    is_strongly_connected,
    smallest_spanning_linear_subgraph,
    strongly_connected_components,
)
from .equilibria import Kind, boundary_equilibria, positive_equilibria
from .graph import Hyperchain, HyperchainError, HyperchainSystem, _Digraph

BATTERY_EQUILIBRIA_BOUND = 8


class NotHamiltonian(HyperchainError):
    pass


class Inapplicable(HyperchainError):
    pass


class Outcome(str, enum.Enum):
    LIKELY_PERMANENT = "LikelyPermanent"
    NOT_PERMANENT = "NotPermanent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PermanenceOptions:
    """Thresholds of the numeric test. All of them are heuristics.

    A trial passes when its minimum coordinate over the late window stays
    above ``floor`` and is no longer falling: the late-window minimum is at
    most ``stall_tol`` below the previous window's, in natural-log units.
    While some trial has not passed, the horizon doubles, at most
    ``extensions`` times. A trial fails when its late minimum is below
    ``delta_fail`` and still falling at the final horizon. Passing trials
    whose minimum is below ``delta`` are counted as near-boundary.
    """

    t_end: float = 500.0
    window: float = 0.2
    offset: float = 1e-3
    delta: float = 1e-4
    delta_fail: float = 1e-8
    floor: float = 1e-12
    stall_tol: float = 0.05
    extensions: int = 4
    random_trials: int = 20
    seed: int = 0
    rtol: float = 1e-6
    use_theorems: bool = True

    def __post_init__(self):
        if not 0 < self.window <= 0.5:
            raise ValueError("window must lie in (0, 0.5]")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")


@dataclass(frozen=True, eq=False)
class PermanenceVerdict:
    outcome: Outcome
    delta_estimate: float | None
    trials: int
    options: PermanenceOptions
    witness: dict | None = None
    horizon: float | None = None
    trial_minima: np.ndarray | None = field(default=None, repr=False)
    trial_drops: np.ndarray | None = field(default=None, repr=False)
    below_delta: int = 0

    def to_dict(self) -> dict:
        from .report import num

        d = {
            "outcome": self.outcome.value,
            "delta_estimate": None if self.delta_estimate is None else num(self.delta_estimate),
            "trials": self.trials,
            "parameters": asdict(self.options),
            "horizon": self.horizon,
            "trials_below_delta": self.below_delta,
        }
        if self.witness is not None:
            d["witness"] = self.witness
        return d


def _face_start(n: int, support, offset: float) -> np.ndarray:
    x = np.full(n, offset)
    x[list(support)] = (1.0 - offset * (n - len(support))) / len(support)
    return x


def battery(sys: HyperchainSystem, opts: PermanenceOptions = PermanenceOptions()) -> np.ndarray:
    """Deterministic near-boundary starting points, one per row.

    Every proper face of dimension at most 2 or codimension at most 2 gets its
    barycentre pushed ``offset`` inward; faces carrying a boundary equilibrium
    get that equilibrium pushed inward; then come ``random_trials`` seeded
    mixtures (a random point of a random face plus small random mass on the
    missing species).
    """
    n = sys.n
    if n == 1:
        return np.ones((1, 1))
    starts = []
    sizes = sorted(set(range(1, min(3, n - 1) + 1)) | set(range(max(1, n - 2), n)))
    for s in sizes:
        for support in itertools.combinations(range(n), s):
            starts.append(_face_start(n, support, opts.offset))
    if n <= BATTERY_EQUILIBRIA_BOUND:
        for beq in boundary_equilibria(sys):
            x = beq.point * (1.0 - opts.offset * len(beq.face))
            x[np.asarray(beq.face) - 1] = opts.offset
            starts.append(x)
    rng = np.random.default_rng(opts.seed)
    for _ in range(opts.random_trials):
        k = int(rng.integers(1, n))
        support = rng.choice(n, size=k, replace=False)
        x = 10.0 ** rng.uniform(-4, -2, size=n)
        x[support] = rng.dirichlet(np.ones(k))
        starts.append(x / x.sum())
    out: list[np.ndarray] = []
    for x in starts:
        if not any(np.allclose(x, y, rtol=0, atol=1e-12) for y in out):
            out.append(x)
    return np.array(out)


def _log_field(K: np.ndarray):
    def fun(t, U):
        X = np.exp(U)
        X /= X.sum(axis=1, keepdims=True)
        f = X @ K
        return f - np.sum(f * X, axis=1, keepdims=True)

    return fun


def _renormalize(U: np.ndarray) -> np.ndarray:
    return U - logsumexp(U, axis=1, keepdims=True)


class _WindowMinima:
    """Running per-trial minimum of ``min_i log x_i`` in fixed-width time blocks."""

    def __init__(self, trials: int, block: float):
        self.block = block
        self.blocks: list[np.ndarray] = []
        self.trials = trials

    def __call__(self, t, U, f, h):
        b = max(int(np.ceil(t / self.block - 1e-9)) - 1, 0)
        while len(self.blocks) <= b:
            self.blocks.append(np.full(self.trials, np.inf))
        np.minimum(self.blocks[b], U.min(axis=1), out=self.blocks[b])

    def window(self, lo: float, hi: float) -> np.ndarray:
        i, j = int(round(lo / self.block)), int(round(hi / self.block))
        return np.min(self.blocks[i:j], axis=0)


def _numeric(sys: HyperchainSystem, opts: PermanenceOptions) -> PermanenceVerdict:
    K = sys.K
    X0 = battery(sys, opts)
    m = X0.shape[0]
    U = _renormalize(np.log(X0))
    fun = _log_field(K)
    # four blocks per window keeps both windows aligned with the block grid after doubling
    rec = _WindowMinima(m, opts.window * opts.t_end / 4)
    scale = lambda a, b: np.full_like(a, opts.rtol)
    log_delta, log_fail, log_floor = np.log(opts.delta), np.log(opts.delta_fail), np.log(opts.floor)
    t, T = 0.0, opts.t_end
    for k in range(opts.extensions + 1):
        res = dopri5(fun, t, U, T, scale, project=_renormalize, on_accept=rec)
        if res.status != "completed":
            return PermanenceVerdict(
                Outcome.INCONCLUSIVE, None, m, opts,
                witness={"kind": "integration failure", "status": res.status, "t": res.t}, horizon=T,
            )
        U, t = res.y, T
        w = opts.window * T
        late = rec.window(T - w, T)
        drop = rec.window(T - 2 * w, T - w) - late
        falling = drop > opts.stall_tol
        passed = (late >= log_floor) & ~falling
        if passed.all():
            return PermanenceVerdict(
                Outcome.LIKELY_PERMANENT, float(np.exp(late.min())), m, opts,
                horizon=T, trial_minima=np.exp(late), trial_drops=drop,
                below_delta=int(np.sum(late < log_delta)),
            )
        failing = (late < log_fail) & falling
        if k == opts.extensions:
            break
        T *= 2
    est = float(np.exp(late.min()))
    below = int(np.sum(late < log_delta))
    if failing.any():
        i = int(np.argmin(np.where(failing, late, np.inf)))
        witness = {
            "kind": "trajectory",
            "trial": i,
            "start": X0[i].tolist(),
            "late_window_min": float(np.exp(late[i])),
            "late_window_log_min": float(late[i]),
            "log_drop": float(drop[i]),
            "window": [T - 2 * w, T],
        }
        return PermanenceVerdict(
            Outcome.NOT_PERMANENT, est, m, opts, witness, T, np.exp(late), drop, below
        )
    return PermanenceVerdict(Outcome.INCONCLUSIVE, est, m, opts, None, T, np.exp(late), drop, below)


def numeric_permanence_test(sys: HyperchainSystem, opts: PermanenceOptions | None = None) -> PermanenceVerdict:
    """Permanence verdict for ``sys``.

    Theorem shortcuts come first: a network that is not strongly connected,
    or a system without positive equilibria, cannot be permanent. Neither can
    a system whose positive equilibria form a continuum, because that set
    reaches the boundary and every point of it is a fixed orbit. Everything
    else goes to the numeric battery. ``use_theorems=False`` skips the
    shortcuts, which is useful for checking numerics against theory.
    """
    opts = opts or PermanenceOptions()
    if opts.use_theorems:
        if not is_strongly_connected(sys.graph):
            comps = strongly_connected_components(sys.graph)
            witness = {"kind": "not strongly connected", "components": [list(c) for c in comps]}
            return PermanenceVerdict(Outcome.NOT_PERMANENT, None, 0, opts, witness)
        eq = positive_equilibria(sys)
        if eq.kind is Kind.EMPTY:
            witness = {"kind": "no positive equilibrium", "equilibria": eq.to_dict()}
            return PermanenceVerdict(Outcome.NOT_PERMANENT, None, 0, opts, witness)
        if eq.kind is Kind.CONTINUUM:
            witness = {"kind": "equilibrium continuum reaches the boundary", "equilibria": eq.to_dict()}
            return PermanenceVerdict(Outcome.NOT_PERMANENT, None, 0, opts, witness)
    return _numeric(sys, opts)


def hamiltonian_permanence_rates(h: _Digraph) -> np.ndarray:
    """Rate 1 along a Hamiltonian cycle and ``1/(4n)`` on every other edge."""
    cyc = find_hamiltonian_cycle(h)
    if cyc is None:
        raise NotHamiltonian("graph has no Hamiltonian cycle")
    n = h.n
    K = h.adjacency / (4.0 * n)
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        K[a - 1, b - 1] = 1.0
    K.flags.writeable = False
    return K


@dataclass(frozen=True, eq=False)
class NonpermanenceConstruction:
    """Rates with no positive equilibrium on a strongly connected, non-cycle graph.

    ``cover`` is the lexicographically smallest spanning linear subgraph,
    ``edge = (a, b)`` the smallest edge outside it and ``c`` the cover
    predecessor of ``b``. At epsilon = 0 (cover edges 1, ``edge`` 2, the rest
    0) the solution of ``K^T z = const * 1`` is ``z``, which is negative at ``c``.
    """

    rates: np.ndarray
    rates_at_zero: np.ndarray
    z: np.ndarray
    cover: tuple[tuple[int, int], ...]
    edge: tuple[int, int]
    c: int
    epsilon: float
    residual: float


class NonpermanenceRates(NamedTuple):
    rates: np.ndarray
    z: np.ndarray


def nonpermanence_construction(h: Hyperchain, epsilon: float = 1e-3) -> NonpermanenceConstruction:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not is_strongly_connected(h):
        raise Inapplicable("graph is not strongly connected")
    if is_cycle_graph(h):
        raise Inapplicable("graph is a single cycle")
    cover = smallest_spanning_linear_subgraph(h)
    if cover is None:
        raise Inapplicable("graph has no spanning linear subgraph")
    n = h.n
    in_cover = set(cover.edges)
    a, b = min(e for e in h.edges if e not in in_cover)
    c = next(t for t, hd in cover.edges if hd == b)
    K0 = np.zeros((n, n))
    for t, hd in cover.edges:
        K0[t - 1, hd - 1] = 1.0
    K0[a - 1, b - 1] = 2.0
    u = np.ones(n)
    u[c - 1] = -1.0
    if n > 2:
        z = u / (n - 2)
        lhs = K0.T @ z
        resid = max(
            float(np.max(np.abs(lhs - 1.0 / (n - 2)))),
            float(np.max(np.abs(lhs - z @ lhs))),
        )
    else:
        # u sums to zero, so no rescaling puts it on the simplex at all
        z = u
        resid = float(np.max(np.abs(K0.T @ z - 1.0)))
    if resid > 1e-10 or z.min() >= 0:
        raise AssertionError(f"construction check failed (residual {resid:.3g})")
    K = h.adjacency * float(epsilon)
    K[K0 > 0] = K0[K0 > 0]
    K.flags.writeable = False
    K0.flags.writeable = False
    z.flags.writeable = False
    return NonpermanenceConstruction(K, K0, z, cover.edges, (a, b), c, float(epsilon), resid)


def nonpermanence_rates(h: Hyperchain, epsilon: float = 1e-3) -> NonpermanenceRates:
    con = nonpermanence_construction(h, epsilon)
    return NonpermanenceRates(con.rates, con.z)


def psi_average(sys: HyperchainSystem, x0, t_end: float, rtol: float = 1e-10) -> float:
    """Time average of ``Psi = sum_i (f_i - rho)`` along the orbit from ``x0``.

    ``Psi`` is the growth rate of ``log prod_i x_i``; the sum runs over every
    species, including those absent at ``x0``. Species outside the support of
    ``x0`` stay at zero, so only the support is integrated (in log
    coordinates) alongside the running integral.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n,) or x0.min() < 0 or abs(x0.sum() - 1) > 1e-9:
        raise ValueError("x0 must be a point of the simplex")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    K = sys.K
    n = sys.n
    idx = np.flatnonzero(x0 > 0)
    m = idx.size

    def fun(t, y):
        x = np.zeros(n)
        w = np.exp(y[:m] - y[:m].max())
        x[idx] = w / w.sum()
        f = x @ K
        g = f - f @ x
        return np.concatenate([g[idx], [g.sum()]])

    y0 = np.concatenate([np.log(x0[idx]), [0.0]])
    res = dopri5(fun, 0.0, y0, t_end, lambda a, b: rtol * (1.0 + np.maximum(np.abs(a), np.abs(b))))
    if res.status != "completed":
        raise RuntimeError(f"integration stopped: {res.status}")
    return float(res.y[-1] / t_end)
