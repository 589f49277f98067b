"""Reading and writing labeled hyperchains.

Text format (HYPERCHAIN v1)::

    # HYPERCHAIN v1
    n 3
    1 2 1.0
    2 3 0.5
    3 1 2

Everything after ``#`` is a comment. Vertices are 1-indexed and every rate
must be positive. The JSON form is
``{"n": 3, "edges": [{"tail": 1, "head": 2, "rate": 1.0}, ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import HyperchainError, HyperchainSystem, IsolatedVertex, new_hyperchain

HEADER = "# HYPERCHAIN v1"


class ParseError(ValueError):
    def __init__(self, line: int | None, reason: str):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")
        self.line = line
        self.reason = reason


def _build(n: int, rows: list[tuple[int, int, int, float]], n_line: int | None) -> HyperchainSystem:
    seen: dict[tuple[int, int], int] = {}
    for lineno, t, h, r in rows:
        if not (1 <= t <= n and 1 <= h <= n):
            raise ParseError(lineno, f"edge {t}->{h} outside 1..{n}")
        if not (np.isfinite(r) and r > 0):
            raise ParseError(lineno, f"rate must be positive, got {r}")
        if (t, h) in seen:
            raise ParseError(lineno, f"duplicate edge {t}->{h} (first on line {seen[(t, h)]})")
        seen[(t, h)] = lineno
    try:
        graph = new_hyperchain(n, [(t, h) for _, t, h, _ in rows])
    except IsolatedVertex as exc:
        raise ParseError(n_line, f"vertex {exc.vertex} has no incident edge") from exc
    except HyperchainError as exc:
        raise ParseError(n_line, str(exc)) from exc
    K = np.zeros((n, n))
    for _, t, h, r in rows:
        K[t - 1, h - 1] = r
    return HyperchainSystem(graph, K)


def parse_text(text: str) -> HyperchainSystem:
    n: int | None = None
    n_line: int | None = None
    rows: list[tuple[int, int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ParseError(lineno, "expected 'n <count>' as first entry")
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(lineno, f"bad species count {parts[1]!r}") from None
            if n < 1:
                raise ParseError(lineno, "species count must be positive")
            n_line = lineno
            continue
        if len(parts) != 3:
            raise ParseError(lineno, "expected '<tail> <head> <rate>'")
        try:
            t, h, r = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(lineno, f"cannot parse edge {line!r}") from None
        rows.append((lineno, t, h, r))
    if n is None:
        raise ParseError(None, "missing 'n <count>' line")
    if not rows:
        raise ParseError(n_line, "no edges")
    return _build(n, rows, n_line)


def parse_json(text: str) -> HyperchainSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ParseError(None, "JSON network needs 'n' and 'edges'")
    rows = []
    for k, e in enumerate(doc["edges"]):
        try:
            rows.append((None, int(e["tail"]), int(e["head"]), float(e["rate"])))
        except (KeyError, TypeError, ValueError):
            raise ParseError(None, f"edge #{k} malformed: {e!r}") from None
    if not rows:
        raise ParseError(None, "no edges")
    return _build(int(doc["n"]), rows, None)


def loads(text: str) -> HyperchainSystem:
    """Parse either format, sniffing JSON by its leading brace."""
    if text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)


def load(path: str | Path) -> HyperchainSystem:
    return loads(Path(path).read_text())


def dumps_text(sys: HyperchainSystem, comment: str | None = None) -> str:
    lines = [HEADER]
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"n {sys.n}")
    lines += [f"{t} {h} {r!r}" for t, h, r in sys.rated_edges()]
    return "\n".join(lines) + "\n"


def dumps_json(sys: HyperchainSystem) -> str:
    doc = {
        "n": sys.n,
        "edges": [{"tail": t, "head": h, "rate": r} for t, h, r in sys.rated_edges()],
    }
    return json.dumps(doc, sort_keys=True)
