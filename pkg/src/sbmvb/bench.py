"""Desk-scale confusion-matrix benchmark over synthetic block-model draws.

For every true class count, draw `networks_per_q` graphs, run the Q sweep
on each, and tally which Q each criterion picked.  Replicate seeds are
spread with a fixed stride so any cell can be re-run in isolation.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import FitOptions
from .generate import SbmParams, affiliation_matrix, hub_matrix, sample_sbm
from .selection import SelectionConfig, select_q

__all__ = ["BenchConfig", "ConfusionMatrix", "run_bench", "SEED_STRIDE"]

SEED_STRIDE = 10007
_MAX_RETRIES = 3
_TOPOLOGIES = ("affiliation", "hubs")
_CRITERIA = ("ilvb", "icl")

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchConfig:
    n_vertices: int = 50
    within: float = 0.9
    between: float = 0.1
    q_true_set: tuple[int, ...] = (3, 4, 5, 6, 7)
    networks_per_q: int = 20
    q_scan: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    restarts: int = 5
    topology: str = "affiliation"
    seed: int = 0
    criteria: tuple[str, ...] = ("ilvb",)
    workers: int = 1
    fit_options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        if self.n_vertices < 1 or self.networks_per_q < 1 or self.restarts < 1:
            raise ValueError("counts must be >= 1")
        if not (0.0 <= self.within <= 1.0 and 0.0 <= self.between <= 1.0):
            raise ValueError("within/between must lie in [0, 1]")
        if self.topology not in _TOPOLOGIES:
            raise ValueError(f"topology must be one of {_TOPOLOGIES}")
        for name in self.criteria:
            if name not in _CRITERIA:
                raise ValueError(f"unknown criterion {name!r}; choose from {_CRITERIA}")
        if not self.criteria or not self.q_true_set or not self.q_scan:
            raise ValueError("criteria, q_true_set and q_scan must be nonempty")
        if list(self.q_scan) != list(range(self.q_scan[0], self.q_scan[-1] + 1)):
            raise ValueError("q_scan must be a contiguous ascending range")
        missing = [q for q in self.q_true_set if q not in self.q_scan]
        if missing:
            raise ValueError(f"q_true values {missing} are outside the scanned range")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ConfusionMatrix:
    """Integer tally: rows are true class counts, columns the scanned Q."""

    q_true_values: tuple[int, ...]
    q_scan: tuple[int, ...]
    counts: np.ndarray

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def diagonal_fractions(self) -> dict[int, float]:
        """Fraction of replicates where the selected Q equals the true Q."""
        out = {}
        for i, q_true in enumerate(self.q_true_values):
            total = int(self.counts[i].sum())
            hits = int(self.counts[i, self.q_scan.index(q_true)]) if q_true in self.q_scan else 0
            out[q_true] = hits / total if total else 0.0
        return out

    def overall_diagonal_fraction(self) -> float:
        total = int(self.counts.sum())
        hits = sum(
            int(self.counts[i, self.q_scan.index(q_true)])
            for i, q_true in enumerate(self.q_true_values)
            if q_true in self.q_scan
        )
        return hits / total if total else 0.0

    def to_csv(self) -> str:
        lines = ["q_true," + ",".join(str(q) for q in self.q_scan)]
        for i, q_true in enumerate(self.q_true_values):
            lines.append(f"{q_true}," + ",".join(str(int(c)) for c in self.counts[i]))
        return "\n".join(lines) + "\n"


def _connectivity(cfg: BenchConfig, q_true: int) -> np.ndarray:
    if cfg.topology == "affiliation":
        return affiliation_matrix(q_true, cfg.within, cfg.between)
    return hub_matrix(q_true, cfg.within, cfg.between)


def _run_once(cfg: BenchConfig, q_true: int, seed: int) -> dict[str, int]:
    params = SbmParams.equal_proportions(_connectivity(cfg, q_true))
    g, _ = sample_sbm(params, cfg.n_vertices, seed)
    sel = SelectionConfig(
        q_min=cfg.q_scan[0],
        q_max=cfg.q_scan[-1],
        restarts=cfg.restarts,
        fit_options=cfg.fit_options,
        seed=seed,
        include_icl="icl" in cfg.criteria,
    )
    report = select_q(g, sel)
    return {name: report.q_star_by_criterion[name] for name in cfg.criteria}


def _run_cell(args) -> tuple[int, int, dict[str, int]]:
    cfg, q_true, replicate, base_seed = args
    last_err: Exception | None = None
    for attempt in range(_MAX_RETRIES + 1):
        seed = base_seed + attempt
        try:
            return q_true, replicate, _run_once(cfg, q_true, seed)
        except (ArithmeticError, RuntimeError) as exc:
            last_err = exc
            log.warning(
                "bench cell q_true=%d replicate=%d seed=%d failed: %s",
                q_true, replicate, seed, exc,
            )
    raise RuntimeError(
        f"bench cell q_true={q_true} replicate={replicate} still failing "
        f"after {_MAX_RETRIES} retries: {last_err}"
    )


def run_bench(cfg: BenchConfig) -> dict[str, ConfusionMatrix]:
    """Run the full grid; returns one confusion matrix per criterion.

    Cells get seeds ``seed + global_index * SEED_STRIDE`` (global index in
    row-major (q_true, replicate) order); a failing cell is re-drawn with
    the next seed up to three times.  Tallies are merged in replicate
    order, so the output is identical whether run serially or pooled.
    """
    cells = []
    for gi, (q_true, replicate) in enumerate(
        (qt, r) for qt in cfg.q_true_set for r in range(cfg.networks_per_q)
    ):
        cells.append((cfg, q_true, replicate, cfg.seed + gi * SEED_STRIDE))

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    row = {q: i for i, q in enumerate(cfg.q_true_set)}
    col = {q: j for j, q in enumerate(cfg.q_scan)}
    matrices = {
        name: ConfusionMatrix(
            cfg.q_true_set,
            cfg.q_scan,
            np.zeros((len(cfg.q_true_set), len(cfg.q_scan)), dtype=np.int64),
        )
        for name in cfg.criteria
    }
    order = {(qt, r): k for k, (_, qt, r, _) in enumerate(cells)}
    for q_true, replicate, picks in sorted(results, key=lambda t: order[(t[0], t[1])]):
        for name, q_star in picks.items():
            matrices[name].counts[row[q_true], col[q_star]] += 1
    return matrices
