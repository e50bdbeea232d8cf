"""Random-graph sampling from the block model, plus the two benchmark
connectivity layouts (plain communities, and communities plus a hub class).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = ["SbmParams", "sample_sbm", "affiliation_matrix", "hub_matrix"]

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class SbmParams:
    """Mixture proportions and class-pair connection probabilities.

    proportions : (Q,) nonnegative, sums to 1.
    connectivity : (Q, Q) entries in [0, 1], symmetric (undirected target).
    """

    proportions: np.ndarray
    connectivity: np.ndarray

    def __post_init__(self):
        props = np.asarray(self.proportions, dtype=float)
        conn = np.asarray(self.connectivity, dtype=float)
        if props.ndim != 1 or props.size < 1:
            raise ValueError("proportions must be a nonempty vector")
        if np.any(props < 0) or abs(props.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("proportions must be nonnegative and sum to 1")
        q = props.size
        if conn.shape != (q, q):
            raise ValueError(f"connectivity must be ({q}, {q}), got {conn.shape}")
        if np.any(conn < 0) or np.any(conn > 1):
            raise ValueError("connection probabilities must lie in [0, 1]")
        if not np.allclose(conn, conn.T, atol=0):
            raise ValueError("connectivity must be symmetric for undirected sampling")
        object.__setattr__(self, "proportions", props)
        object.__setattr__(self, "connectivity", conn)

    @property
    def n_classes(self) -> int:
        return self.proportions.size

    @classmethod
    def equal_proportions(cls, connectivity) -> "SbmParams":
        conn = np.asarray(connectivity, dtype=float)
        q = conn.shape[0]
        return cls(np.full(q, 1.0 / q), conn)


def sample_sbm(params: SbmParams, n_vertices: int, seed: int):
    """Draw (graph, labels) from the block model.

    Labels are iid draws from the class proportions; each unordered pair
    i < j gets an edge with the probability attached to its class pair.
    Identical (params, n_vertices, seed) give identical output: the
    stream is a seeded PCG64 generator.
    """
    if n_vertices < 1:
        raise ValueError("n_vertices must be >= 1")
    rng = np.random.default_rng(seed)
    labels = rng.choice(params.n_classes, size=n_vertices, p=params.proportions)
    pair_probs = params.connectivity[np.ix_(labels, labels)]
    draws = rng.random((n_vertices, n_vertices)) < pair_probs
    upper = np.triu(draws, k=1)
    adj = (upper | upper.T).astype(np.uint8)
    return Graph(adj), labels.astype(np.int64)


def affiliation_matrix(q: int, within: float, between: float) -> np.ndarray:
    """Q x Q connectivity with `within` on the diagonal, `between` elsewhere."""
    _check_probs(within, between)
    if q < 1:
        raise ValueError("q must be >= 1")
    mat = np.full((q, q), float(between))
    np.fill_diagonal(mat, float(within))
    return mat


def hub_matrix(q: int, within: float, between: float) -> np.ndarray:
    """Affiliation structure on the first q-1 classes; the last class is a
    hub class whose vertices connect with probability `within` to everyone."""
    _check_probs(within, between)
    if q < 2:
        raise ValueError("a hub class needs at least one non-hub class (q >= 2)")
    mat = affiliation_matrix(q, within, between)
    mat[-1, :] = within
    mat[:, -1] = within
    return mat


def _check_probs(*values: float):
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"probability out of range: {v}")
