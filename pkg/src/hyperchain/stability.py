"""Linearisation of the replicator system at interior and boundary equilibria."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._field import equilibrium_residual
from .equilibria import RANK_RTOL, BoundaryEquilibrium
from .graph import HyperchainError, HyperchainSystem, induced_system

SIGN_RTOL = 1e-9
LAMBDA1_RTOL = 1e-8
EQUILIBRIUM_TOL = 1e-8


class NotAnEigenpair(HyperchainError):
    pass


class Lambda1NotFound(HyperchainError):
    pass


class NotAnEquilibrium(HyperchainError):
    pass


class Stability(str, enum.Enum):
    LINEARLY_STABLE = "LinearlyStable"
    EXPONENTIALLY_STABLE = "ExponentiallyStable"
    MARGINAL = "Marginal"
    UNSTABLE = "Unstable"


def jacobian(sys: HyperchainSystem, z: np.ndarray) -> np.ndarray:
    """Derivative of ``x * (K^T x - (x^T K^T x) 1)`` at ``z``."""
    K = sys.K
    z = np.asarray(z, dtype=float)
    f = K.T @ z
    rho = z @ f
    return np.diag(f - rho) + z[:, None] * K.T - np.outer(z, (K + K.T) @ z)


def sign_tolerance(eigs) -> float:
    eigs = np.asarray(eigs)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return SIGN_RTOL * max(1.0, radius)


def spectrum_distance(a, b) -> float:
    """Largest gap between two multisets of eigenvalues under the best one-to-one pairing."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return np.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def sort_spectrum(eigs) -> np.ndarray:
    eigs = np.asarray(eigs, dtype=complex)
    return np.array(sorted(eigs, key=lambda z: (z.real, z.imag)), dtype=complex)


def _nearest(eigs: np.ndarray, target: complex) -> int:
    return int(np.argmin(np.abs(eigs - target)))


def rank_one_eigen_update(m: np.ndarray, u: np.ndarray, lambda1: complex, v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Spectrum of ``m + u v^T`` given an eigenpair ``(lambda1, u)`` of ``m``.

    Only the eigenvalue belonging to ``u`` moves, to ``lambda1 + v^T u``.
    """
    m = np.asarray(m, dtype=float)
    u = np.asarray(u)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    if np.linalg.norm(m @ u - lambda1 * u) > tol * scale * np.linalg.norm(u):
        raise NotAnEigenpair("u is not an eigenvector of m for lambda1")
    eigs = np.linalg.eigvals(m).astype(complex)
    k = _nearest(eigs, lambda1)
    eigs[k] = lambda1 + np.dot(v, u)
    return eigs


def _theorem_route(sys: HyperchainSystem, z: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    K = sys.K
    M = z[:, None] * K.T
    lam1 = float(z @ K @ z)
    eigs_m = np.linalg.eigvals(M).astype(complex)
    k = _nearest(eigs_m, lam1)
    if abs(eigs_m[k] - lam1) > LAMBDA1_RTOL * max(1.0, abs(lam1)):
        raise Lambda1NotFound(f"z^T K z = {lam1} is not in the spectrum of diag(z) K^T")
    eigs = eigs_m.copy()
    eigs[k] = -lam1
    return eigs, k, eigs_m


def equilibrium_eigenvalues(sys: HyperchainSystem, z: np.ndarray) -> tuple[np.ndarray, bool]:
    """Jacobian spectrum at a positive equilibrium via the spectrum of ``diag(z) K^T``.

    The eigenvalue ``z^T K z`` of ``diag(z) K^T`` flips sign and the rest carry
    over. The second value reports whether a direct eigensolve of the Jacobian
    agrees within 1e-6.
    """
    z = np.asarray(z, dtype=float)
    eigs, _, _ = _theorem_route(sys, z)
    direct = np.linalg.eigvals(jacobian(sys, z))
    return eigs, spectrum_distance(eigs, direct) <= 1e-6


@dataclass(frozen=True, eq=False)
class StabilityReport:
    point: np.ndarray
    jacobian: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    classification: Stability
    tolerance: float
    cross_check: bool
    transverse_eigenvalues: np.ndarray | None = None
    stable_count: int | None = None
    property_P: tuple[bool, bool, bool] | None = None
    induced: "StabilityReport | None" = field(default=None, repr=False)

    def to_dict(self) -> dict:
        from .report import complex_list, vec

        d = {
            "point": vec(self.point),
            "eigenvalues": complex_list(self.eigenvalues),
            "classification": self.classification.value,
            "tolerance": self.tolerance,
            "cross_check": self.cross_check,
        }
        if self.transverse_eigenvalues is not None:
            d["transverse_eigenvalues"] = complex_list(self.transverse_eigenvalues)
        if self.stable_count is not None:
            d["stable_count"] = self.stable_count
        if self.property_P is not None:
            d["property_P"] = list(self.property_P)
        if self.induced is not None:
            d["induced_classification"] = self.induced.classification.value
        return d


def property_P(K: np.ndarray) -> tuple[bool, bool, bool]:
    """(K invertible, (K^T)^{-1} 1 > 0, diag((K^T)^{-1} 1) K^T has n-1 eigenvalues in Re < 0)."""
    n = K.shape[0]
    s = np.linalg.svd(K, compute_uv=False)
    if s[0] == 0 or np.sum(s > RANK_RTOL * s[0]) < n:
        return (False, False, False)
    w = np.linalg.solve(K.T, np.ones(n))
    eigs = np.linalg.eigvals(w[:, None] * K.T)
    tol = sign_tolerance(eigs)
    return (True, bool(np.all(w > 0)), int(np.sum(eigs.real < -tol)) == n - 1)


def classify_positive_stability(sys: HyperchainSystem, z: np.ndarray) -> StabilityReport:
    z = np.asarray(z, dtype=float)
    if z.min() <= 0 or abs(z.sum() - 1) > 1e-9:
        raise NotAnEquilibrium("point is not in the open simplex")
    if equilibrium_residual(sys.K, z) > EQUILIBRIUM_TOL:
        raise NotAnEquilibrium(f"residual {equilibrium_residual(sys.K, z):.3g} too large")
    eigs, k, eigs_m = _theorem_route(sys, z)
    J = jacobian(sys, z)
    direct = np.linalg.eigvals(J)
    tol = sign_tolerance(eigs)
    # the flipped eigenvalue points off the simplex and does not count
    rest = np.delete(eigs, k)
    if np.any(rest.real > tol):
        cls = Stability.UNSTABLE
    elif np.all(rest.real < -tol):
        cls = Stability.LINEARLY_STABLE
    else:
        cls = Stability.MARGINAL
    return StabilityReport(
        point=z,
        jacobian=J,
        eigenvalues=eigs,
        classification=cls,
        tolerance=tol,
        cross_check=spectrum_distance(eigs, direct) <= 1e-6,
        stable_count=int(np.sum(eigs_m.real < -sign_tolerance(eigs_m))),
        property_P=property_P(sys.K),
    )


def boundary_stability(sys: HyperchainSystem, beq: BoundaryEquilibrium) -> StabilityReport:
    """Stability of a boundary equilibrium from its transverse and tangential parts.

    Each vanishing species i contributes the eigenvalue ``f_i(z) - rho(z)``;
    the rest is the spectrum of the subsystem on the face.
    """
    z = beq.point
    K = sys.K
    f = K.T @ z
    rho = float(z @ f)
    zero = np.asarray(beq.face) - 1
    transverse = (f[zero] - rho).astype(complex)
    sub = induced_system(sys, beq.support).system
    inner = classify_positive_stability(sub, beq.induced_point)
    eigs = np.concatenate([transverse, inner.eigenvalues])
    J = jacobian(sys, z)
    direct = np.linalg.eigvals(J)
    tol = sign_tolerance(eigs)
    if inner.classification is Stability.UNSTABLE or np.any(transverse.real > tol):
        cls = Stability.UNSTABLE
    elif inner.classification is Stability.LINEARLY_STABLE and np.all(transverse.real < -tol):
        cls = Stability.EXPONENTIALLY_STABLE
    else:
        cls = Stability.MARGINAL
    return StabilityReport(
        point=z,
        jacobian=J,
        eigenvalues=eigs,
        classification=cls,
        tolerance=tol,
        cross_check=spectrum_distance(eigs, direct) <= 1e-8 * max(1.0, float(np.abs(direct).max())),
        transverse_eigenvalues=transverse,
        induced=inner,
    )
