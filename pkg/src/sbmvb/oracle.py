"""Exact marginal quantities on tiny graphs by full enumeration.

For each label assignment the conjugate integrals over mixing proportions
and connection probabilities are closed-form, so the marginal likelihood
of a graph is a log-sum-exp over all Q^N assignments.  Enumeration runs
in mixed-radix order over vectorized chunks with a running log-sum-exp,
and is capacity-limited; this is a certification tool, not an estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .engine import Priors
from .graph import Graph, validate_labels

__all__ = ["OracleLimits", "CapacityError", "exact_complete_log", "exact_log_marginal"]


@dataclass(frozen=True)
class OracleLimits:
    max_assignments: int = 2_000_000


class CapacityError(ValueError):
    """Enumeration size exceeds the configured limit."""


def _pair_table(g: Graph):
    """Vertex index pairs of the likelihood product, and which carry edges."""
    n = g.n_vertices
    if g.directed:
        rows, cols = np.where(~np.eye(n, dtype=bool))
    else:
        rows, cols = np.triu_indices(n, k=1)
    edges = g.adj[rows, cols] != 0
    return rows, cols, edges


def _chunk_complete_log(labels: np.ndarray, g: Graph, priors: Priors) -> np.ndarray:
    """Integrated complete-data log-likelihood for a (C, N) block of labelings."""
    q = priors.n_classes
    c, n = labels.shape
    counts = np.stack([(labels == a).sum(axis=1) for a in range(q)], axis=1)
    dir_part = (
        gammaln(priors.mix.sum())
        - gammaln(priors.mix).sum()
        - gammaln(priors.mix.sum() + n)
        + gammaln(priors.mix[None, :] + counts).sum(axis=1)
    )

    rows, cols, edges = _pair_table(g)
    zi = labels[:, rows]
    zj = labels[:, cols]
    if not g.directed:
        zi, zj = np.minimum(zi, zj), np.maximum(zi, zj)
    keys = zi * q + zj
    offs = np.arange(c)[:, None] * (q * q)
    pair_counts = np.bincount((keys + offs).ravel(), minlength=c * q * q).reshape(c, q * q)
    edge_counts = np.bincount(
        (keys[:, edges] + offs).ravel(), minlength=c * q * q
    ).reshape(c, q * q)

    e0 = priors.edge.ravel()[None, :]
    z0 = priors.nonedge.ravel()[None, :]
    beta_part = (
        gammaln(e0 + edge_counts)
        + gammaln(z0 + (pair_counts - edge_counts))
        - gammaln(e0 + z0 + pair_counts)
        - (gammaln(e0) + gammaln(z0) - gammaln(e0 + z0))
    ).sum(axis=1)
    return dir_part + beta_part


def exact_complete_log(g: Graph, labels, q: int, priors: Priors | None = None) -> float:
    """ln p(X, Z): class-count Dirichlet integral plus one Beta integral per
    class pair over its edge/non-edge tallies."""
    priors = priors or Priors.jeffreys(q)
    if priors.n_classes != q:
        raise ValueError("priors sized for a different number of classes")
    arr = validate_labels(labels, g.n_vertices, q)
    return float(_chunk_complete_log(arr[None, :], g, priors)[0])


def exact_log_marginal(
    g: Graph, q: int, priors: Priors | None = None, limits: OracleLimits | None = None
) -> float:
    """ln p(X | Q) by log-sum-exp over every one of the Q^N assignments."""
    priors = priors or Priors.jeffreys(q)
    if priors.n_classes != q:
        raise ValueError("priors sized for a different number of classes")
    limits = limits or OracleLimits()
    n = g.n_vertices
    total = q**n
    if total > limits.max_assignments:
        raise CapacityError(
            f"Q^N = {q}^{n} = {total} assignments exceeds the limit {limits.max_assignments}"
        )

    n_pairs = n * (n - 1) if g.directed else n * (n - 1) // 2
    chunk = max(256, 4_000_000 // max(1, n_pairs))
    radix = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    running = -np.inf
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        labels = (idx[:, None] // radix[None, :]) % q
        running = np.logaddexp(running, logsumexp(_chunk_complete_log(labels, g, priors)))
    return float(running)
