"""Absolute and relative mass-action dynamics of a hyperchain system.

Both modes integrate logarithms of the concentrations. Coordinates stay
positive for free, species near zero keep full relative accuracy, and the
log-growth rates (``K^T x`` in absolute mode, ``K^T x - x^T K^T x`` in
relative mode) stay bounded on the simplex. Species that start at zero stay at
zero and are dropped from the integration.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import logsumexp, softmax

from . import _rk
from ._field import replicator_field
from .graph import HyperchainError, HyperchainSystem, with_rates

LOG_MAX = float(np.log(np.finfo(float).max))
PROJECTION_DRIFT = 0.1
PROJECTION_COVER = 0.9


class ZeroVector(HyperchainError):
    pass


class Mode(str, enum.Enum):
    ABSOLUTE = "Absolute"
    RELATIVE = "Relative"

    @classmethod
    def _missing_(cls, value):
        # short names as used on the command line
        return {"abs": cls.ABSOLUTE, "rel": cls.RELATIVE}.get(str(value).lower())


class Termination(str, enum.Enum):
    COMPLETED = "Completed"
    BLOW_UP = "BlowUp"
    CONVERGED = "Converged"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-8
    atol: float = 1e-10
    blow_up_threshold: float = 1e12
    h_min: float = 1e-14
    h_max: float = np.inf
    max_steps: int = 5_000_000
    method: str = "dopri5"  # or "rk4"
    rk4_step: float = 1e-3
    converge_tol: float = 1e-10
    converge_steps: int = 5
    detect_convergence: bool = True
    record_every: int = 1


@dataclass(eq=False)
class Trajectory:
    mode: Mode
    times: np.ndarray
    states: np.ndarray
    termination: Termination
    time_estimate: float | None = None
    point: np.ndarray | None = None
    steps: int = 0
    rejected: int = 0
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def sidecar(self, opts: IntegratorOptions | None = None) -> dict:
        from .report import vec

        d = {
            "mode": self.mode.value,
            "termination": self.termination.value,
            "t_final": float(self.times[-1]),
            "steps": self.steps,
            "rejected": self.rejected,
        }
        if self.time_estimate is not None:
            d["time_estimate"] = self.time_estimate
        if self.point is not None:
            d["point"] = vec(self.point)
        if opts is not None:
            d["options"] = {
                "rtol": opts.rtol,
                "atol": opts.atol,
                "blow_up_threshold": opts.blow_up_threshold,
                "h_min": opts.h_min,
                "method": opts.method,
            }
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.states.shape[1]
        w.writerow(["t"] + [f"x{i}" for i in range(1, n + 1)])
        for t, x in zip(self.times, self.states):
            w.writerow([f"{t:.15g}"] + [f"{v:.15g}" for v in x])
        return buf.getvalue()

    def write(self, csv_path: str | Path, opts: IntegratorOptions | None = None) -> Path:
        """Write the CSV and a ``.json`` sidecar next to it; returns the sidecar path."""
        csv_path = Path(csv_path)
        csv_path.write_text(self.to_csv())
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(opts), sort_keys=True, indent=2) + "\n")
        return side


def absolute_rhs(sys: HyperchainSystem, x: np.ndarray) -> np.ndarray:
    """x * (K^T x)."""
    x = np.asarray(x, dtype=float)
    return x * (x @ sys.K)


def relative_rhs(sys: HyperchainSystem, x: np.ndarray) -> np.ndarray:
    """x * (K^T x - (x^T K^T x) 1)."""
    return replicator_field(sys.K, np.asarray(x, dtype=float))


def _support(x0: np.ndarray) -> np.ndarray:
    return np.flatnonzero(x0 > 0)


def _run(fun, y0, t_end, scale, opts: IntegratorOptions, project=None, on_accept=None, t0=0.0):
    if opts.method == "rk4":
        return _rk.rk4(fun, t0, y0, t_end, opts.rk4_step, project=project, on_accept=on_accept)
    return _rk.dopri5(
        fun, t0, y0, t_end, scale,
        h_max=opts.h_max, h_min=opts.h_min, max_steps=opts.max_steps,
        project=project, on_accept=on_accept,
    )


class _Recorder:
    def __init__(self, n: int, idx: np.ndarray, x0: np.ndarray, every: int):
        self.n = n
        self.idx = idx
        self.every = max(1, every)
        self.count = 0
        self.times = [0.0]
        self.states = [np.array(x0, dtype=float)]

    def add(self, t: float, x_sub: np.ndarray, force: bool = False):
        self.count += 1
        if force or self.count % self.every == 0:
            x = np.zeros(self.n)
            x[self.idx] = x_sub
            if t > self.times[-1]:
                self.times.append(t)
                self.states.append(x)
            else:
                self.states[-1] = x

    def arrays(self):
        return np.array(self.times), np.array(self.states)


def _check_x0(x0, n: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"initial state has shape {x0.shape}, expected ({n},)")
    if not np.all(np.isfinite(x0)) or np.any(x0 < 0):
        raise ValueError("initial state must be finite and nonnegative")
    if not np.any(x0 > 0):
        raise ZeroVector("initial state is zero")
    return x0


def integrate(
    sys: HyperchainSystem,
    mode: Mode | str,
    x0,
    t_end: float,
    opts: IntegratorOptions | None = None,
) -> Trajectory:
    """Integrate the absolute or relative system from ``x0`` up to ``t_end``.

    Absolute mode stops with BlowUp once the largest concentration is past
    ``blow_up_threshold`` and the projected singular time (see
    :func:`blow_up_projection`) has held still, before ``t_end``, while most of
    the way to it was covered; or when the step size collapses while
    concentrations grow. Exponential growth that leaves the double range
    without such a signature ends in StepFailure. Relative mode renormalises to the simplex after each
    accepted step and stops with Converged when the vector field stays below
    ``converge_tol`` for ``converge_steps`` consecutive steps.
    """
    opts = opts or IntegratorOptions()
    mode = Mode(mode)
    x0 = _check_x0(x0, sys.n)
    if mode is Mode.RELATIVE:
        if abs(x0.sum() - 1) > 1e-9:
            raise ValueError("relative mode needs a point of the simplex (sum 1)")
        return _integrate_relative(sys, x0 / x0.sum(), t_end, opts)
    return _integrate_absolute(sys, x0, t_end, opts)


def _log_rates(K: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(K)


def _log_growth(logK: np.ndarray, y: np.ndarray) -> np.ndarray:
    """log(K^T x) with x = exp(y), computed without forming x."""
    return logsumexp(logK + y[:, None], axis=0)


def blow_up_projection(logK: np.ndarray, y: np.ndarray) -> float:
    """Projected singular time minus now, ``1 / max_j (log gamma_j)'``.

    With ``gamma = K^T x`` the log-growth rates, a finite-time singularity at T
    has ``gamma_j ~ c / (T - t)`` and the projection ``t + 1 / (log gamma_j)'``
    settles at T. Exponential or iterated-exponential growth makes it advance
    with t instead.
    """
    lg = _log_growth(logK, y)
    gamma = np.exp(lg)
    finite = np.isfinite(lg)
    # (log gamma_j)' = sum_i w_ij gamma_i with w_ij proportional to k_ij x_i
    w = np.exp(logK + y[:, None] - np.where(finite, lg, 0.0)[None, :])
    w[:, ~finite] = 0.0
    with np.errstate(invalid="ignore"):
        accel = np.nan_to_num(w.T @ gamma, nan=np.inf)
    top = float(accel.max())
    return 1.0 / top if top > 0 else np.inf


def _descendants(K: np.ndarray, seeds) -> set[int]:
    out = set(seeds)
    stack = list(seeds)
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(K[i] > 0):
            if j not in out:
                out.add(int(j))
                stack.append(int(j))
    return out


def _integrate_absolute(sys, x0, t_end, opts: IntegratorOptions) -> Trajectory:
    """Absolute mode in log coordinates.

    A species whose concentration leaves the double range (above ~1e304) can
    no longer feed a finite growth rate. It is retired together with all its
    descendants, and the remaining upstream species, which form an autonomous
    subsystem, are integrated on. Retired species are recorded as ``inf`` and
    listed in ``extras["out_of_range"]``; if nothing blows up the run ends
    with StepFailure, since their fate past that point is not computed.
    """
    n = sys.n
    active = _support(x0)
    y_full = np.full(n, -np.inf)
    y_full[active] = np.log(x0[active])
    retired: dict[int, float] = {}
    times, states = [0.0], [np.array(x0, dtype=float)]
    count = 0
    steps = rejected = 0
    state = {"ymax": float(y_full[active].max()), "anchor": None}
    y_cap_full = np.full(n, LOG_MAX - 10.0)

    def record(t, force=False):
        nonlocal count
        count += 1
        if force or count % max(1, opts.record_every) == 0:
            x = np.exp(y_full)
            for i in retired:
                x[i] = np.inf
            if t > times[-1]:
                times.append(t)
                states.append(x)
            else:
                states[-1] = x

    t = 0.0
    with np.errstate(over="ignore"):
        while True:
            logK = _log_rates(sys.K[np.ix_(active, active)])
            y_cap = y_cap_full[active]

            def fun(t, y, logK=logK):
                return np.exp(_log_growth(logK, y))

            def scale(y_old, y_new):
                big = np.maximum(np.abs(y_old), np.abs(y_new))
                x = np.exp(np.maximum(y_old, y_new))
                # past the float range of x only the logarithm's leading digits matter
                return opts.rtol + opts.atol / x + 1e-3 * opts.rtol * big

            def on_accept(t, y, f, h, logK=logK, active=active, y_cap=y_cap):
                y_full[active] = y
                record(t)
                if np.any(y > y_cap):
                    return "out_of_range"
                grew = y.max() > state["ymax"]
                state["ymax"] = max(state["ymax"], float(y.max()))
                if y.max() <= np.log(opts.blow_up_threshold) or not grew:
                    state["anchor"] = None
                    return None
                proj = t + blow_up_projection(logK, y)
                anchor = state["anchor"]
                if anchor is None or abs(proj - anchor[0]) > PROJECTION_DRIFT * (t - anchor[1]):
                    state["anchor"] = (proj, t)
                    return None
                # the projected singular time held still while most of the way to it was covered
                p0, t0 = anchor
                if t - t0 >= PROJECTION_COVER * (p0 - t0) and proj <= t_end:
                    return "blow_up"
                return None

            y_start = y_full[active].copy()
            res = _run(fun, y_start, t_end, scale, opts, on_accept=on_accept, t0=t)
            steps += res.steps
            rejected += res.rejected
            t = res.t
            y_full[active] = res.y
            if res.status == "stopped" and res.reason == "out_of_range":
                local = np.flatnonzero(res.y > y_cap)
                sub = sys.K[np.ix_(active, active)]
                gone = _descendants(sub, [int(i) for i in local])
                for k in gone:
                    retired[int(active[k])] = t
                active = np.array([a for k, a in enumerate(active) if k not in gone], dtype=int)
                state["anchor"] = None
                if active.size and t < t_end:
                    state["ymax"] = float(y_full[active].max())
                    continue
                res = _rk.SolveResult(t, y_full[active], "completed", None, 0, 0, 0.0, False)
            break
        record(t, force=True)
    est = None
    if res.status == "stopped":
        term, est = Termination.BLOW_UP, t
    elif res.status == "step_collapse" and not res.overflow and res.y.size and res.y.max() > y_start.max():
        # the step size vanished while concentrations kept growing
        term, est = Termination.BLOW_UP, t
    elif res.status == "completed" and not retired:
        term = Termination.COMPLETED
    else:
        term = Termination.STEP_FAILURE
    extras = {"log_final": y_full.copy()}
    if retired:
        extras["out_of_range"] = {int(i) + 1: s for i, s in sorted(retired.items())}
    return Trajectory(Mode.ABSOLUTE, np.array(times), np.array(states), term, time_estimate=est,
                      steps=steps, rejected=rejected, extras=extras)


def stable_step_cap(K: np.ndarray) -> float:
    scale = float(np.abs(K).sum(axis=0).max()) if K.size else 0.0
    return 1.0 / scale if scale > 0 else np.inf


def _log_simplex(x0: np.ndarray, idx: np.ndarray) -> np.ndarray:
    u = np.log(x0[idx])
    return u - logsumexp(u)


def _integrate_relative(sys, x0, t_end, opts: IntegratorOptions) -> Trajectory:
    idx = _support(x0)
    K = sys.K[np.ix_(idx, idx)]
    rec = _Recorder(sys.n, idx, x0, opts.record_every)
    calm = {"run": 0, "point": None}

    def fun(t, u):
        x = softmax(u)
        f = x @ K
        return f - f @ x

    def scale(u_old, u_new):
        x = np.exp(np.maximum(u_old, u_new))
        return opts.rtol + opts.atol / x

    def project(u):
        return u - logsumexp(u)

    def on_accept(t, u, du, h):
        x = np.exp(u)
        rec.add(t, x)
        if opts.detect_convergence:
            if np.max(np.abs(x * du)) < opts.converge_tol:
                calm["run"] += 1
                if calm["run"] >= opts.converge_steps:
                    return "converged"
            else:
                calm["run"] = 0
        return None

    # keep h * |eigenvalue| well inside the stability region so that decay
    # towards an attracting equilibrium is actually resolved
    opts = replace(opts, h_max=min(opts.h_max, stable_step_cap(K)))
    res = _run(fun, _log_simplex(x0, idx), t_end, scale, opts, project=project, on_accept=on_accept)
    rec.add(res.t, np.exp(res.y), force=True)
    times, states = rec.arrays()
    if res.status == "stopped":
        return Trajectory(Mode.RELATIVE, times, states, Termination.CONVERGED,
                          point=states[-1].copy(), steps=res.steps, rejected=res.rejected)
    term = Termination.COMPLETED if res.status == "completed" else Termination.STEP_FAILURE
    return Trajectory(Mode.RELATIVE, times, states, term, steps=res.steps, rejected=res.rejected)


def integrate_unscaled_relative(
    sys: HyperchainSystem, p0, total0: float, t_end: float, opts: IntegratorOptions | None = None
) -> Trajectory:
    """Relative concentrations and total mass in the original time variable.

    Integrates ``p' = s * p * (f(p) - rho(p))``, ``s' = s^2 rho(p)`` together with
    the rescaled clock ``tau' = s``. ``extras`` holds the totals and ``tau``.
    """
    opts = opts or IntegratorOptions()
    p0 = _check_x0(p0, sys.n)
    idx = _support(p0)
    K = sys.K[np.ix_(idx, idx)]
    m = idx.size
    rec = _Recorder(sys.n, idx, p0 / p0.sum(), opts.record_every)
    totals = [float(total0)]
    taus = [0.0]

    def fun(t, y):
        u, ls = y[:m], y[m]
        x = softmax(u)
        f = x @ K
        rho = f @ x
        s = np.exp(ls)
        out = np.empty_like(y)
        out[:m] = s * (f - rho)
        out[m] = s * rho
        out[m + 1] = s
        return out

    def scale(y_old, y_new):
        sc = np.full(y_old.shape, opts.rtol)
        x = np.exp(np.maximum(y_old[:m], y_new[:m]))
        sc[:m] += opts.atol / x
        sc[m + 1] += opts.rtol * abs(y_new[m + 1])
        return sc

    def project(y):
        y = y.copy()
        y[:m] -= logsumexp(y[:m])
        return y

    def on_accept(t, y, dy, h):
        rec.add(t, np.exp(y[:m]))
        totals.append(float(np.exp(y[m])))
        taus.append(float(y[m + 1]))
        if y[m] > np.log(opts.blow_up_threshold) and t + (LOG_MAX - y[m]) / max(dy[m], 1e-300) <= t_end:
            return "blow_up"
        return None

    y0 = np.concatenate([_log_simplex(p0 / p0.sum(), idx), [np.log(total0), 0.0]])
    with np.errstate(over="ignore"):
        res = _run(fun, y0, t_end, scale, opts, project=project, on_accept=on_accept)
    times, states = rec.arrays()
    if res.status == "completed":
        term = Termination.COMPLETED
    elif res.status == "stopped" or res.overflow:
        term = Termination.BLOW_UP
    else:
        term = Termination.STEP_FAILURE
    return Trajectory(Mode.RELATIVE, times, states, term,
                      time_estimate=res.t if term is Termination.BLOW_UP else None,
                      steps=res.steps, rejected=res.rejected,
                      extras={"totals": np.array(totals), "tau": np.array(taus)})


def _point_segment_distances(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.einsum("ij,ij->i", p[None, :] - a, ab) / denom
    s = np.where(denom > 0, np.clip(s, 0.0, 1.0), 0.0)
    proj = a + s[:, None] * ab
    return np.linalg.norm(p[None, :] - proj, axis=1)


def polyline_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two polylines (vertices as rows), exact for the vertices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def directed(p, q):
        if len(q) == 1:
            return float(np.max(np.linalg.norm(p - q[0], axis=1)))
        return max(float(_point_segment_distances(x, q[:-1], q[1:]).min()) for x in p)

    return max(directed(a, b), directed(b, a))


@dataclass(frozen=True)
class ConjugacyScaling:
    """Diagonal rescaling ``y = s * x`` taking the original system to its normal form."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or np.any(s <= 0):
            raise ValueError("scaling vector must be positive")
        object.__setattr__(self, "s", s)

    def to_normal_form(self, x: np.ndarray) -> np.ndarray:
        return self.s * x

    def from_normal_form(self, y: np.ndarray) -> np.ndarray:
        return y / self.s


def nondimensionalize(sys: HyperchainSystem) -> tuple[HyperchainSystem, ConjugacyScaling]:
    """Divide each row of K by the rate on its lowest-numbered outgoing edge.

    Returns the normal-form system ``K0 = diag(1/s) K`` and ``s``. If ``x(t)``
    solves the absolute system for K, then ``s * x(t)`` solves it for ``K0``.
    """
    K = sys.K
    s = np.ones(sys.n)
    for i, outs in enumerate(sys.graph.out_neighbors):
        if outs:
            s[i] = K[i, outs[0]]
    K0 = K / s[:, None]
    return with_rates(sys.graph, K0), ConjugacyScaling(s)


def to_relative(x) -> tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("concentrations must be nonnegative")
    total = float(x.sum())
    if total <= 0:
        raise ZeroVector("cannot normalise the zero vector")
    return x / total, total


def from_relative(p, total: float) -> np.ndarray:
    return np.asarray(p, dtype=float) * total


def with_options(opts: IntegratorOptions | None, **kw) -> IntegratorOptions:
    return replace(opts or IntegratorOptions(), **kw)
