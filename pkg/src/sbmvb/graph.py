"""Binary relational data: the observed network and its text I/O.

Graphs are dense 0/1 adjacency matrices, undirected and loop-free by
default.  Vertex indices are 0-based everywhere, including the edge-list
file format (whitespace-separated index pairs, ``#`` comments allowed).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "GraphParseError",
    "load_edge_list",
    "load_adjacency_csv",
    "write_edge_list",
    "edge_count",
    "validate_labels",
]


class GraphParseError(ValueError):
    """Malformed edge-list or adjacency input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable binary adjacency structure.

    Attributes
    ----------
    adj : (N, N) uint8 array, entries exactly 0 or 1, read-only.
    directed : if False the matrix is symmetric.
    self_loops : if False the diagonal is zero.  Self-loop likelihood
        terms are not implemented anywhere in this package; the flag is
        reserved and must currently be False.
    """

    adj: np.ndarray
    directed: bool = False
    self_loops: bool = field(default=False)

    def __post_init__(self):
        adj = np.ascontiguousarray(self.adj, dtype=np.uint8)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if np.any(adj > 1):
            raise ValueError("adjacency entries must be 0 or 1")
        if self.self_loops:
            raise ValueError("self-loop support is reserved but not implemented")
        if np.any(np.diag(adj) != 0):
            raise ValueError("self-loops present but self_loops=False")
        if not self.directed and not np.array_equal(adj, adj.T):
            raise ValueError("undirected graph requires a symmetric adjacency")
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)

    @property
    def n_vertices(self) -> int:
        return self.adj.shape[0]

    def density(self) -> float:
        n = self.n_vertices
        pairs = n * (n - 1) if self.directed else n * (n - 1) // 2
        return edge_count(self) / pairs if pairs else 0.0

    @classmethod
    def empty(cls, n_vertices: int, directed: bool = False) -> "Graph":
        return cls(np.zeros((n_vertices, n_vertices), dtype=np.uint8), directed=directed)


def _open_lines(source):
    if isinstance(source, (str, bytes)):
        return io.StringIO(source if isinstance(source, str) else source.decode())
    return source


def load_edge_list(source, n_vertices: int, directed: bool = False) -> Graph:
    """Parse an edge list into a Graph.

    ``source`` is a text stream or a string holding the stream contents.
    Lines hold two whitespace-separated 0-based vertex indices; lines
    starting with ``#`` and blank lines are skipped.  Duplicate edges are
    idempotent; undirected input is symmetrized.
    """
    adj = np.zeros((n_vertices, n_vertices), dtype=np.uint8)
    for lineno, raw in enumerate(_open_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"line {lineno}: expected two vertex indices, got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: non-integer vertex index in {line!r}") from None
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            raise GraphParseError(
                f"line {lineno}: vertex index out of range for N={n_vertices}: {line!r}"
            )
        if i == j:
            raise GraphParseError(f"line {lineno}: self-loop {i} not allowed")
        adj[i, j] = 1
        if not directed:
            adj[j, i] = 1
    return Graph(adj, directed=directed)


def load_adjacency_csv(source, directed: bool = False) -> Graph:
    """Read an N x N comma-separated 0/1 matrix (small fixtures)."""
    try:
        mat = np.loadtxt(_open_lines(source), delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise GraphParseError(f"bad adjacency CSV: {exc}") from None
    if np.any((mat != 0) & (mat != 1)):
        raise GraphParseError("adjacency CSV entries must be 0 or 1")
    return Graph(mat.astype(np.uint8), directed=directed)


def write_edge_list(g: Graph, sink) -> None:
    """Emit one edge per line, 0-indexed; i < j for undirected graphs."""
    if g.directed:
        rows, cols = np.nonzero(g.adj)
    else:
        rows, cols = np.nonzero(np.triu(g.adj, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        sink.write(f"{i} {j}\n")


def edge_count(g: Graph) -> int:
    """Number of unordered present edges (undirected) or ordered pairs (directed)."""
    total = int(g.adj.sum())
    return total if g.directed else total // 2


def validate_labels(labels, n_vertices: int, q: int) -> np.ndarray:
    """Check a per-vertex class assignment (0-based, values in [0, q))."""
    arr = np.asarray(labels, dtype=np.int64)
    if arr.shape != (n_vertices,):
        raise ValueError(f"labels must have shape ({n_vertices},), got {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= q):
        raise ValueError(f"labels must lie in [0, {q})")
    return arr
