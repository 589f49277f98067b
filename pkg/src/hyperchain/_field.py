"""The replicator vector field and its pieces, shared by several modules."""

import numpy as np


def fitness(K: np.ndarray, x: np.ndarray) -> np.ndarray:
    """f(x) = K^T x; works on a single state or a stack of states (last axis = species)."""
    return x @ K


def mean_fitness(K: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.sum((x @ K) * x, axis=-1)


def replicator_field(K: np.ndarray, x: np.ndarray) -> np.ndarray:
    f = x @ K
    rho = np.sum(f * x, axis=-1, keepdims=True)
    return x * (f - rho)


def equilibrium_residual(K: np.ndarray, x: np.ndarray) -> float:
    """max |K^T x - (x^T K^T x) 1| at a point of the simplex."""
    f = x @ K
    return float(np.max(np.abs(f - f @ x)))
