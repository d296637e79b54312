"""Weighted graphs, the edge-list format and the exact MAX K-CUT oracle."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from mbqaoa import kernels

Assignment = tuple[int, ...]

DEFAULT_SEARCH_BITS = 24


class GraphFormatError(ValueError):
    """Raised for a malformed edge-list document."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InstanceTooLarge(ValueError):
    """Raised when an exhaustive or dense computation exceeds its size guard."""


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph without self-loops or parallel edges.

    ``edges`` holds ``(u, v, w)`` triples with ``u < v``, in insertion order.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        seen = set()
        canon = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) outside [0, {self.vertex_count})")
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight on edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), np.zeros(0)
        us, vs, ws = zip(*self.edges)
        return np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), np.array(ws)

    def has_negative_weights(self) -> bool:
        return any(w < 0 for _, _, w in self.edges)

    def digest(self) -> str:
        """Stable SHA-256 of the canonical edge list."""
        h = hashlib.sha256(f"{self.vertex_count}\n".encode())
        for u, v, w in self.edges:
            h.update(f"{u} {v} {w!r}\n".encode())
        return h.hexdigest()

    def to_text(self) -> str:
        lines = [f"p {self.vertex_count}"]
        lines += [f"{u} {v} {w!r}" for u, v, w in self.edges]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse the edge-list format.

    Lines are ``u v [w]`` (weight defaults to 1.0), ``# comment`` or an
    optional header ``p <vertex_count>``.  Without a header the vertex count
    is one more than the largest index seen.
    """
    header: int | None = None
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if header is not None:
                raise GraphFormatError(lineno, "repeated header")
            if edges:
                raise GraphFormatError(lineno, "header must precede edges")
            if len(fields) != 2:
                raise GraphFormatError(lineno, "header is 'p <vertex_count>'")
            try:
                header = int(fields[1])
            except ValueError:
                raise GraphFormatError(lineno, f"bad vertex count {fields[1]!r}") from None
            if header < 0:
                raise GraphFormatError(lineno, "negative vertex count")
            continue
        if len(fields) not in (2, 3):
            raise GraphFormatError(lineno, f"expected 'u v [w]', got {line!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(lineno, f"bad vertex index in {line!r}") from None
        try:
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError:
            raise GraphFormatError(lineno, f"bad weight {fields[2]!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(lineno, "negative vertex index")
        if u == v:
            raise GraphFormatError(lineno, f"self-loop on vertex {u}")
        if not math.isfinite(w):
            raise GraphFormatError(lineno, f"non-finite weight {fields[2]!r}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(lineno, f"duplicate edge {key}")
        if header is not None and key[1] >= header:
            raise GraphFormatError(lineno, f"vertex {key[1]} exceeds header count {header}")
        seen.add(key)
        edges.append((u, v, w))
    if header is None:
        header = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    return Graph(header, tuple(edges))


def read_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return Graph(n, tuple((u, v, weight) for u, v in combinations(range(n), 2)))


def cut_value(g: Graph, a: Assignment) -> float:
    """Total weight of edges whose endpoints carry different labels."""
    if len(a) != g.vertex_count:
        raise ValueError(f"assignment has {len(a)} labels for {g.vertex_count} vertices")
    return float(sum(w for u, v, w in g.edges if a[u] != a[v]))


def decode_base(index: int, n: int, k: int) -> Assignment:
    out = []
    for _ in range(n):
        index, d = divmod(index, k)
        out.append(d)
    return tuple(out)


def brute_force_max_kcut(
    g: Graph,
    k: int,
    *,
    max_bits: float = DEFAULT_SEARCH_BITS,
    max_solutions: int | None = None,
) -> tuple[float, list[Assignment]]:
    """Exact optimum over all ``k**|V|`` assignments with labels in ``[0, k)``.

    Returns the optimum and every maximiser (sorted by base-``k`` index,
    truncated to ``max_solutions`` if given).
    """
    if k < 2:
        raise ValueError("K must be >= 2")
    n = g.vertex_count
    if n * math.log2(k) > max_bits:
        raise InstanceTooLarge(
            f"{k}^{n} assignments exceed the {max_bits}-bit brute-force guard"
        )
    total = k**n
    vals = kernels.cut_values(n, k, *g.arrays(), 0, total)
    best = float(vals.max())
    hits = np.flatnonzero(np.isclose(vals, best, rtol=0.0, atol=1e-9))
    if max_solutions is not None:
        hits = hits[:max_solutions]
    return best, [decode_base(int(i), n, k) for i in hits]
