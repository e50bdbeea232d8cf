"""Starting responsibilities: Ward clustering of adjacency rows, an
optional k-means pre-stage for large networks, and perturbation policies
for restart diversity.

All initializations are hard (0/1 responsibility rows).  The Ward merge
sequence does not depend on the number of target classes, so one tree
serves every cut; callers sweeping several class counts should build the
tree once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "InitConfig",
    "WardTree",
    "ward_tree",
    "ward_init",
    "kmeans_rows",
    "kmeans_then_ward",
    "random_labels",
    "perturb_labels",
    "labels_to_resp",
    "init_resp",
]


@dataclass(frozen=True)
class InitConfig:
    method: str = "ward"  # ward | kmeans_then_ward | random
    kmeans_k: int = 40
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("ward", "kmeans_then_ward", "random"):
            raise ValueError(f"unknown init method {self.method!r}")
        if self.kmeans_k < 1:
            raise ValueError("kmeans_k must be >= 1")


class WardTree:
    """Agglomerative Ward merge history over weighted points.

    Greedy minimum-variance merges: each step joins the active pair with
    the smallest size-weighted squared centroid distance; ties resolve to
    the lexicographically smallest pair of cluster indices.  ``cut(q)``
    replays the first ``n - q`` merges and labels clusters in order of
    their smallest member index.
    """

    def __init__(self, points: np.ndarray, sizes: np.ndarray | None = None):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty 2-D array")
        n = pts.shape[0]
        sizes = np.ones(n) if sizes is None else np.asarray(sizes, dtype=np.float64)
        if sizes.shape != (n,) or np.any(sizes <= 0):
            raise ValueError("sizes must be positive, one per point")
        self.n_points = n
        self.merges: list[tuple[int, int]] = []
        self._build(pts.copy(), sizes.copy())

    def _build(self, cent: np.ndarray, size: np.ndarray):
        n = self.n_points
        alive = np.ones(n, dtype=bool)
        cost = np.full((n, n), np.inf)
        sq = (cent * cent).sum(axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (cent @ cent.T), 0.0)
        iu, ju = np.triu_indices(n, k=1)
        w = size[iu] * size[ju] / (size[iu] + size[ju])
        cost[iu, ju] = w * d2[iu, ju]

        for _ in range(n - 1):
            flat = int(np.argmin(cost))
            a, b = divmod(flat, n)
            self.merges.append((a, b))
            new_size = size[a] + size[b]
            cent[a] = (size[a] * cent[a] + size[b] * cent[b]) / new_size
            size[a] = new_size
            alive[b] = False
            cost[b, :] = np.inf
            cost[:, b] = np.inf
            others = np.where(alive)[0]
            others = others[others != a]
            if others.size:
                diff = cent[others] - cent[a]
                d2a = (diff * diff).sum(axis=1)
                wa = size[a] * size[others] / (size[a] + size[others])
                lo = np.minimum(others, a)
                hi = np.maximum(others, a)
                cost[lo, hi] = wa * d2a

    def cut(self, q: int) -> np.ndarray:
        """Cluster label per point after stopping at q clusters."""
        if not (1 <= q <= self.n_points):
            raise ValueError(f"q must lie in [1, {self.n_points}]")
        parent = np.arange(self.n_points)

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.merges[: self.n_points - q]:
            parent[find(b)] = find(a)
        roots = np.array([find(i) for i in range(self.n_points)])
        order = {r: k for k, r in enumerate(sorted(set(roots.tolist())))}
        return np.array([order[r] for r in roots], dtype=np.int64)


def ward_tree(g: Graph) -> WardTree:
    return WardTree(g.adj.astype(np.float64))


def ward_init(g: Graph, q: int) -> np.ndarray:
    """Hard responsibilities from the Ward dendrogram cut at q clusters."""
    if not (1 <= q <= g.n_vertices):
        raise ValueError(f"q must lie in [1, {g.n_vertices}]")
    return labels_to_resp(ward_tree(g).cut(q), q)


def _lloyd(rows: np.ndarray, k: int, rng: np.random.Generator, max_iters: int = 100):
    n = rows.shape[0]
    centers = rows[rng.choice(n, size=k, replace=False)].copy()
    row_sq = (rows * rows).sum(axis=1)
    prev = None
    sse_trace: list[float] = []
    n_reseeds = 0
    assign = np.zeros(n, dtype=np.int64)
    for _ in range(max_iters):
        d2 = row_sq[:, None] - 2.0 * (rows @ centers.T) + (centers * centers).sum(axis=1)[None, :]
        np.maximum(d2, 0.0, out=d2)
        assign = np.argmin(d2, axis=1)
        sse_trace.append(float(d2[np.arange(n), assign].sum()))
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign.copy()
        for empty in np.where(np.bincount(assign, minlength=k) == 0)[0]:
            far = int(np.argmax(d2[np.arange(n), assign]))
            centers[empty] = rows[far]
            assign[far] = empty
            n_reseeds += 1
        for c in range(k):
            members = assign == c
            if members.any():
                centers[c] = rows[members].mean(axis=0)
    return assign, sse_trace, n_reseeds


def kmeans_rows(g: Graph, k: int, seed: int) -> np.ndarray:
    """Lloyd iterations on adjacency rows from random initial centers.

    Distance ties resolve to the lowest cluster index; empty clusters are
    re-seeded from the point farthest from its center; stops when the
    assignment repeats or after 100 iterations.
    """
    if not (1 <= k <= g.n_vertices):
        raise ValueError(f"k must lie in [1, {g.n_vertices}]")
    labels, _, _ = _lloyd(g.adj.astype(np.float64), k, np.random.default_rng(seed))
    return labels


def kmeans_then_ward(g: Graph, q: int, k: int = 40, seed: int = 0) -> np.ndarray:
    """Hard responsibilities from k-means pre-clusters merged by weighted Ward.

    k-means compresses the vertices to at most k groups; Ward then runs on
    the group centroids (weighted by group size) and the dendrogram cut
    labels every vertex through its group.
    """
    if k < q:
        raise ValueError(f"kmeans_k={k} must be >= target classes q={q}")
    if not (1 <= q <= g.n_vertices):
        raise ValueError(f"q must lie in [1, {g.n_vertices}]")
    coarse = kmeans_rows(g, min(k, g.n_vertices), seed)
    present = np.unique(coarse)
    rows = g.adj.astype(np.float64)
    cents = np.stack([rows[coarse == c].mean(axis=0) for c in present])
    sizes = np.array([(coarse == c).sum() for c in present], dtype=np.float64)
    if q > present.size:
        raise ValueError(f"k-means produced {present.size} groups, fewer than q={q}")
    group_labels = WardTree(cents, sizes).cut(q)
    remap = {int(c): int(group_labels[pos]) for pos, c in enumerate(present)}
    labels = np.array([remap[int(c)] for c in coarse], dtype=np.int64)
    return labels_to_resp(labels, q)


def random_labels(n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, q, size=n).astype(np.int64)


def perturb_labels(labels: np.ndarray, q: int, fraction: float, rng: np.random.Generator):
    """Reassign a random subset of vertices to uniform random classes."""
    labels = np.asarray(labels, dtype=np.int64).copy()
    n = labels.size
    n_moves = min(n, int(np.ceil(fraction * n)))
    if n_moves:
        picks = rng.choice(n, size=n_moves, replace=False)
        labels[picks] = rng.integers(0, q, size=n_moves)
    return labels


def labels_to_resp(labels: np.ndarray, q: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    resp = np.zeros((labels.size, q))
    resp[np.arange(labels.size), labels] = 1.0
    return resp


def init_resp(g: Graph, q: int, cfg: InitConfig | None = None) -> np.ndarray:
    """Dispatch on the configured method; always returns a hard matrix."""
    cfg = cfg or InitConfig()
    if cfg.method == "ward":
        return ward_init(g, q)
    if cfg.method == "kmeans_then_ward":
        return kmeans_then_ward(g, q, cfg.kmeans_k, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    return labels_to_resp(random_labels(g.n_vertices, q, rng), q)
