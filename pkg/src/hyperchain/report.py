"""JSON helpers shared by the report producers."""

import hashlib
import json
from typing import Any

import numpy as np

SIG_DIGITS = 12


def num(v: float, digits: int = SIG_DIGITS) -> float | None:
    v = float(v)
    if not np.isfinite(v):
        return None
    return float(f"{v:.{digits}g}")


def vec(a, digits: int = SIG_DIGITS) -> list:
    return [num(v, digits) for v in np.asarray(a, dtype=float).ravel()]


def complex_list(vals, digits: int = SIG_DIGITS) -> list[list[float]]:
    """Eigenvalues as ``[re, im]`` pairs sorted by real then imaginary part."""
    vals = sorted(np.asarray(vals, dtype=complex), key=lambda z: (z.real, z.imag))
    return [[num(z.real, digits), num(z.imag, digits)] for z in vals]


def _default(o: Any):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(doc: Any, indent: int | None = 2) -> str:
    return json.dumps(doc, sort_keys=True, indent=indent, default=_default, allow_nan=False)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
