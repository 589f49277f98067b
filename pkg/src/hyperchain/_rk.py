"""Explicit Runge-Kutta stepping: Dormand-Prince 5(4) with PI control, plus fixed-step RK4.

States may be a single vector or a stack of vectors (rows) that share one
step size; the error norm is the worst row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# fifth-order weights minus the embedded fourth-order ones
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA

Rhs = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class SolveResult:
    t: float
    y: np.ndarray
    status: str  # completed | stopped | step_collapse | max_steps
    reason: str | None
    steps: int
    rejected: int
    h: float
    overflow: bool


def _err_norm(err: np.ndarray, sc: np.ndarray) -> float:
    r = err / sc
    if r.ndim == 1:
        return float(np.sqrt(np.mean(r * r)))
    return float(np.sqrt(np.mean(r * r, axis=-1)).max())


def _initial_step(fun, t0, y0, f0, sc, t_span) -> float:
    d0 = _err_norm(y0, sc)
    d1 = _err_norm(f0, sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, abs(t_span))
    with np.errstate(over="ignore", invalid="ignore"):
        f1 = fun(t0 + h0, y0 + h0 * f0)
    if not np.all(np.isfinite(f1)):
        return h0 * 1e-3
    d2 = _err_norm(f1 - f0, sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, abs(t_span))


def dopri5(
    fun: Rhs,
    t0: float,
    y0: np.ndarray,
    t_end: float,
    scale: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    h0: float | None = None,
    h_max: float = np.inf,
    h_min: float = 1e-14,
    max_steps: int = 10_000_000,
    project: Callable[[np.ndarray], np.ndarray] | None = None,
    on_accept: Callable[[float, np.ndarray, np.ndarray, float], str | None] | None = None,
) -> SolveResult:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    ``scale(y_old, y_new)`` returns the per-component error weights (atol + rtol|y|
    style). ``project`` is applied to every accepted state and must not change
    ``fun``. ``on_accept(t, y, f, h)`` sees each accepted step and may return a
    reason string to stop early.
    """
    t = float(t0)
    y = np.array(y0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        f = fun(t, y)
    overflow = not np.all(np.isfinite(f))
    if overflow:
        return SolveResult(t, y, "step_collapse", "non-finite derivative at start", 0, 0, 0.0, True)
    if h0 is None:
        h = _initial_step(fun, t, y, f, scale(y, y), t_end - t)
    else:
        h = h0
    h = min(h, h_max)
    err_prev = 1e-4
    steps = rejected = 0
    k = [None] * 7
    while t < t_end:
        if steps >= max_steps:
            return SolveResult(t, y, "max_steps", None, steps, rejected, h, overflow)
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < h_min * max(1.0, abs(t)):
            return SolveResult(t, y, "step_collapse", None, steps, rejected, h, overflow)
        k[0] = f
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 7):
                dy = sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0)
                k[s] = fun(t + _C[s] * h, y + h * dy)
            y_new = y + h * sum(b * k[j] for j, b in enumerate(_B) if b != 0)
            err = h * sum(e * k[j] for j, e in enumerate(_E) if e != 0)
            en = _err_norm(err, scale(y, y_new))
        if not np.isfinite(en) or not np.all(np.isfinite(y_new)):
            overflow = True
            rejected += 1
            h *= FAC_MIN
            err_prev = 1e-4
            continue
        if en <= 1.0:
            steps += 1
            t = t_end if last else t + h
            y = y_new if project is None else project(y_new)
            f = k[6]
            if en == 0:
                fac = FAC_MAX
            else:
                fac = min(FAC_MAX, max(FAC_MIN, SAFETY * en ** -ALPHA * err_prev**BETA))
            err_prev = max(en, 1e-4)
            h = min(h * fac, h_max)
            if on_accept is not None:
                reason = on_accept(t, y, f, h)
                if reason is not None:
                    return SolveResult(t, y, "stopped", reason, steps, rejected, h, overflow)
        else:
            rejected += 1
            h *= max(FAC_MIN, SAFETY * en ** -ALPHA)
    return SolveResult(t, y, "completed", None, steps, rejected, h, overflow)


def rk4(
    fun: Rhs,
    t0: float,
    y0: np.ndarray,
    t_end: float,
    h: float,
    *,
    project=None,
    on_accept=None,
) -> SolveResult:
    """Classic fixed-step fourth-order Runge-Kutta, mainly for debugging."""
    t = float(t0)
    y = np.array(y0, dtype=float)
    steps = 0
    overflow = False
    while t < t_end:
        hh = min(h, t_end - t)
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = fun(t, y)
            k2 = fun(t + hh / 2, y + hh / 2 * k1)
            k3 = fun(t + hh / 2, y + hh / 2 * k2)
            k4 = fun(t + hh, y + hh * k3)
            y_new = y + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            overflow = True
            return SolveResult(t, y, "step_collapse", "non-finite state", steps, 0, hh, overflow)
        steps += 1
        t = t + hh if t + hh < t_end else t_end
        y = y_new if project is None else project(y_new)
        if on_accept is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                reason = on_accept(t, y, fun(t, y), hh)
            if reason is not None:
                return SolveResult(t, y, "stopped", reason, steps, 0, hh, overflow)
    return SolveResult(t, y, "completed", None, steps, 0, h, overflow)
