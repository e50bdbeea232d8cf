"""Class-count selection: sweep Q with restarts and keep the best bound.

The headline criterion is ILvb (the converged variational Bayes bound).
The frequentist variational EM fit and its asymptotic ICL criterion are
provided as the comparison baseline; both criteria can be tabulated from
the same restart grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    FitOptions,
    FitResult,
    NumericalError,
    Priors,
    _entropy,
    _fixed_point,
    _pair_masses,
    fit,
    map_labels,
)
from .graph import Graph
from .initializers import labels_to_resp, perturb_labels, ward_tree

__all__ = [
    "SelectionConfig",
    "SelectionReport",
    "FreqParams",
    "FreqFitResult",
    "select_q",
    "restart_resp",
    "fit_freq",
    "icl",
]

_PROB_CLAMP = 1e-10
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class SelectionConfig:
    q_min: int
    q_max: int
    restarts: int = 5
    fit_options: FitOptions = field(default_factory=FitOptions)
    seed: int = 0
    perturb_fraction: float = 0.3
    include_icl: bool = False

    def __post_init__(self):
        if not (1 <= self.q_min <= self.q_max):
            raise ValueError("need 1 <= q_min <= q_max")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not (0.0 <= self.perturb_fraction <= 1.0):
            raise ValueError("perturb_fraction must lie in [0, 1]")


@dataclass
class SelectionReport:
    """Per-restart table, per-Q best fits, and the selected class counts.

    ``q_star`` maximizes ILvb over the swept Q values; ties within 1e-9
    resolve to the smaller Q.  ``scores`` maps criterion name to the
    per-Q best value; ``q_star_by_criterion`` holds the argmax per
    criterion under the same tie rule.
    """

    rows: list[dict]
    best_fits: dict[int, FitResult]
    scores: dict[str, dict[int, float]]
    q_star: int
    q_star_by_criterion: dict[str, int]


@dataclass
class FreqParams:
    """Point estimates of the frequentist model plus its responsibilities."""

    proportions: np.ndarray
    connectivity: np.ndarray
    resp: np.ndarray


@dataclass
class FreqFitResult:
    params: FreqParams
    bound_trace: list[float]
    bound: float
    converged: bool
    iterations: int
    n_repairs: int


def _argmax_small_q(scores: dict[int, float]) -> int:
    best_q, best_v = None, -np.inf
    for q in sorted(scores):
        v = scores[q]
        if np.isfinite(v) and v > best_v + _TIE_TOL:
            best_q, best_v = q, v
    if best_q is None:
        raise RuntimeError("no finite criterion values; selection failed everywhere")
    return best_q


def restart_resp(base_labels, q: int, restart: int, seed: int, fraction: float = 0.3):
    """Responsibilities for restart r: r=0 is the base labeling as-is,
    r>=1 perturbs it (seeded by (seed, q, r), so restarts are independent)."""
    if restart == 0:
        return labels_to_resp(base_labels, q)
    rng = np.random.default_rng((seed, q, restart))
    return labels_to_resp(perturb_labels(base_labels, q, fraction, rng), q)


def select_q(g: Graph, cfg: SelectionConfig, priors_for=Priors.jeffreys) -> SelectionReport:
    """Fit every Q in [q_min, q_max] with restarts; keep the max-ILvb fit per Q.

    Restart 0 uses the Ward initialization; later restarts perturb the
    Ward labels at the configured fraction.  The Ward tree is built once
    and cut per Q.  A Q whose restarts all fail aborts the sweep.
    """
    tree = ward_tree(g)
    rows: list[dict] = []
    best_fits: dict[int, FitResult] = {}
    ilvb_scores: dict[int, float] = {}
    icl_scores: dict[int, float] = {}

    for q in range(cfg.q_min, cfg.q_max + 1):
        base_labels = tree.cut(q)
        best: FitResult | None = None
        best_icl = -np.inf
        failures = 0
        for restart in range(cfg.restarts):
            resp0 = restart_resp(base_labels, q, restart, cfg.seed, cfg.perturb_fraction)
            row = {"q": q, "restart": restart}
            try:
                result = fit(g, q, priors_for(q), resp0, cfg.fit_options)
            except NumericalError as exc:
                failures += 1
                row.update(ilvb=float("nan"), converged=False, iterations=0, error=str(exc))
                rows.append(row)
                continue
            row.update(
                ilvb=result.ilvb, converged=result.converged, iterations=result.iterations
            )
            if best is None or result.ilvb > best.ilvb:
                best = result
            if cfg.include_icl:
                freq = fit_freq(g, q, resp0, cfg.fit_options)
                row["icl"] = icl(g, freq.params, q)
                best_icl = max(best_icl, row["icl"])
            rows.append(row)
        if best is None:
            raise RuntimeError(f"all {cfg.restarts} restarts failed at Q={q} ({failures} errors)")
        best_fits[q] = best
        ilvb_scores[q] = best.ilvb
        if cfg.include_icl:
            icl_scores[q] = best_icl

    scores = {"ilvb": ilvb_scores}
    q_star_by = {"ilvb": _argmax_small_q(ilvb_scores)}
    if cfg.include_icl:
        scores["icl"] = icl_scores
        q_star_by["icl"] = _argmax_small_q(icl_scores)
    return SelectionReport(rows, best_fits, scores, q_star_by["ilvb"], q_star_by)


def _freq_m_step(resp: np.ndarray, adj: np.ndarray, directed: bool, density: float):
    proportions = resp.mean(axis=0)
    edge_mass, pair_mass = _pair_masses(resp, adj, directed)
    conn = np.empty_like(edge_mass)
    starved = pair_mass < 1e-12
    n_repairs = int(starved.sum() if directed else np.triu(starved).sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        np.divide(edge_mass, pair_mass, out=conn)
    conn[starved] = density
    if n_repairs:
        warnings.warn(
            f"{n_repairs} empty class pair(s); connection estimates set to the graph density",
            RuntimeWarning,
            stacklevel=3,
        )
    return proportions, np.clip(conn, 0.0, 1.0), n_repairs


def _freq_bound(resp, proportions, conn, adj, directed) -> float:
    edge_mass, pair_mass = _pair_masses(resp, adj, directed)
    logp = np.log(np.clip(conn, _PROB_CLAMP, 1.0 - _PROB_CLAMP))
    log1m = np.log1p(-np.clip(conn, _PROB_CLAMP, 1.0 - _PROB_CLAMP))
    if directed:
        pair_ll = edge_mass * logp + (pair_mass - edge_mass) * log1m
        total_pairs = float(pair_ll.sum())
    else:
        iu = np.triu_indices(conn.shape[0])
        pair_ll = edge_mass[iu] * logp[iu] + (pair_mass - edge_mass)[iu] * log1m[iu]
        total_pairs = float(pair_ll.sum())
    mix_ll = float((resp * np.log(np.clip(proportions, 1e-300, None))[None, :]).sum())
    return mix_ll + total_pairs + _entropy(resp)


def fit_freq(
    g: Graph, q: int, init_resp: np.ndarray, opts: FitOptions | None = None
) -> FreqFitResult:
    """Frequentist variational EM: point estimates instead of posteriors.

    Same alternation shape as the Bayesian fit (M-step first, bound
    recorded after each M-step, stop on bound stabilization).  Empty-class
    connection estimates are repaired to the graph density.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > g.n_vertices:
        raise ValueError(f"q={q} exceeds the number of vertices {g.n_vertices}")
    opts = opts or FitOptions()
    adj = g.adj.astype(np.float64)
    resp = np.asarray(init_resp, dtype=np.float64).copy()
    density = g.density()

    n_repairs = 0
    proportions, conn, rep = _freq_m_step(resp, adj, g.directed, density)
    n_repairs += rep
    trace = [_freq_bound(resp, proportions, conn, adj, g.directed)]
    converged = False
    cycles = 0
    for cycles in range(1, opts.max_cycles + 1):
        clipped = np.clip(conn, _PROB_CLAMP, 1.0 - _PROB_CLAMP)
        base = np.log(np.clip(proportions, 1e-300, None))
        w_edge = np.log(clipped) - np.log1p(-clipped)
        w_nonedge = np.log1p(-clipped)
        resp, _ = _fixed_point(resp, adj, base, w_edge, w_nonedge, g.directed, opts)
        proportions, conn, rep = _freq_m_step(resp, adj, g.directed, density)
        n_repairs += rep
        trace.append(_freq_bound(resp, proportions, conn, adj, g.directed))
        if abs(trace[-1] - trace[-2]) < opts.elbo_tol:
            converged = True
            break
    params = FreqParams(proportions, conn, resp)
    return FreqFitResult(params, trace, trace[-1], converged, cycles, n_repairs)


def icl(g: Graph, params: FreqParams, q: int) -> float:
    """Asymptotic complete-data criterion at the MAP labels.

    Maximized complete-data log-likelihood of the hard labeling, minus
    (Q(Q+1)/4) ln(N(N-1)/2) for the connection parameters and
    ((Q-1)/2) ln N for the proportions (undirected form).
    """
    if g.directed:
        raise ValueError("ICL is implemented for undirected graphs only")
    n = g.n_vertices
    labels = map_labels(params.resp)
    hard = labels_to_resp(labels, q)
    counts = hard.sum(axis=0)
    edge_mass, pair_mass = _pair_masses(hard, g.adj.astype(np.float64), directed=False)

    occupied = counts > 0
    mix_ll = float((counts[occupied] * np.log(counts[occupied] / n)).sum())
    iu = np.triu_indices(q)
    e = edge_mass[iu]
    m = pair_mass[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(m > 0, e / np.maximum(m, 1.0), 0.0)
        pair_ll = np.where(e > 0, e * np.log(np.maximum(rate, 1e-300)), 0.0) + np.where(
            m - e > 0, (m - e) * np.log(np.maximum(1.0 - rate, 1e-300)), 0.0
        )
    penalty = (q * (q + 1) / 4.0) * np.log(n * (n - 1) / 2.0) + ((q - 1) / 2.0) * np.log(n)
    return mix_ll + float(pair_ll.sum()) - float(penalty)
