"""Variational Bayes EM for the Bayesian block model.

The factorized posterior is a per-vertex multinomial over classes (the
responsibility matrix), a Dirichlet over mixing proportions, and a Beta
per class pair over connection probabilities.  The E-step is a fixed
point on the responsibilities; the M-step is conjugate and closed-form;
the evidence lower bound is available in a general form valid anywhere
and a cheaper simplified form valid right after an M-step.  The ILvb
model-selection score is the simplified bound at convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import Graph
from .special import digamma, ln_beta, ln_gamma

__all__ = [
    "Priors",
    "FitOptions",
    "VariationalState",
    "FitResult",
    "NumericalError",
    "e_step",
    "m_step",
    "lower_bound_general",
    "lower_bound_simplified",
    "fit",
    "ilvb",
    "map_labels",
    "fit_result_to_document",
    "fit_result_from_document",
]

_RESP_FLOOR = 1e-300


class NumericalError(ArithmeticError):
    """Non-finite value produced during optimization."""


@dataclass(frozen=True)
class Priors:
    """Concentration parameters of the conjugate priors.

    mix : (Q,) Dirichlet concentrations over class proportions.
    edge, nonedge : (Q, Q) Beta shape parameters per class pair; the
        edge shape counts present edges, the nonedge shape absent ones.
    The default (all 1/2) is the proper non-informative choice.
    """

    mix: np.ndarray
    edge: np.ndarray
    nonedge: np.ndarray

    def __post_init__(self):
        mix = np.asarray(self.mix, dtype=float)
        edge = np.asarray(self.edge, dtype=float)
        nonedge = np.asarray(self.nonedge, dtype=float)
        q = mix.size
        if mix.ndim != 1 or q < 1:
            raise ValueError("mix concentrations must form a nonempty vector")
        if edge.shape != (q, q) or nonedge.shape != (q, q):
            raise ValueError(f"edge/nonedge priors must have shape ({q}, {q})")
        for name, arr in (("mix", mix), ("edge", edge), ("nonedge", nonedge)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} prior concentrations must be finite and > 0")
        object.__setattr__(self, "mix", mix)
        object.__setattr__(self, "edge", edge)
        object.__setattr__(self, "nonedge", nonedge)

    @property
    def n_classes(self) -> int:
        return self.mix.size

    @classmethod
    def jeffreys(cls, q: int) -> "Priors":
        return cls(np.full(q, 0.5), np.full((q, q), 0.5), np.full((q, q), 0.5))

    @classmethod
    def flat(cls, q: int) -> "Priors":
        return cls(np.ones(q), np.ones((q, q)), np.ones((q, q)))


@dataclass(frozen=True)
class FitOptions:
    """Stopping rules and update policy for the EM loop.

    elbo_tol : stop the outer loop when the bound moves less than this.
    resp_tol : stop the inner fixed point at this L1 change per sweep.
    update_order : "sequential" rows (exact coordinate ascent, monotone
        bound) or "simultaneous" (the all-rows-at-once fixed point).
    damping : blend factor for simultaneous updates; 1 disables blending.
        Ignored in sequential mode.
    """

    elbo_tol: float = 1e-6
    resp_tol: float = 1e-6
    max_cycles: int = 500
    max_sweeps: int = 100
    update_order: str = "sequential"
    damping: float = 1.0

    def __post_init__(self):
        if self.elbo_tol <= 0 or self.resp_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_cycles < 1 or self.max_sweeps < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.update_order not in ("sequential", "simultaneous"):
            raise ValueError(f"unknown update_order {self.update_order!r}")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class VariationalState:
    """Full factorized posterior: responsibilities plus the Dirichlet and
    Beta concentrations (posterior counterparts of the Priors fields)."""

    resp: np.ndarray
    mix: np.ndarray
    edge: np.ndarray
    nonedge: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.mix.size


@dataclass
class FitResult:
    state: VariationalState
    elbo_trace: list[float]
    ilvb: float
    converged: bool
    iterations: int
    q: int = field(init=False)

    def __post_init__(self):
        self.q = self.state.n_classes


def _as_float_adj(g: Graph) -> np.ndarray:
    return np.ascontiguousarray(g.adj, dtype=np.float64)


def _validate_resp(resp: np.ndarray, n: int, q: int) -> np.ndarray:
    resp = np.ascontiguousarray(resp, dtype=np.float64)
    if resp.shape != (n, q):
        raise ValueError(f"responsibilities must have shape ({n}, {q}), got {resp.shape}")
    if np.any(resp < 0) or np.any(resp > 1):
        raise ValueError("responsibilities must lie in [0, 1]")
    sums = resp.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise ValueError("responsibility rows must sum to 1")
    return resp / sums[:, None]


def _pair_masses(resp: np.ndarray, adj: np.ndarray, directed: bool):
    """Soft edge and total pair masses per class pair.

    Entries follow the summation convention of the posterior updates:
    off-diagonal entries sum over ordered pairs i != j, diagonal entries
    over unordered pairs i < j (undirected) or ordered pairs (directed).
    """
    col = resp.sum(axis=0)
    edge_mass = resp.T @ adj @ resp
    pair_mass = np.outer(col, col) - resp.T @ resp
    if not directed:
        edge_mass = edge_mass.copy()
        pair_mass = pair_mass.copy()
        idx = np.arange(resp.shape[1])
        edge_mass[idx, idx] *= 0.5
        pair_mass[idx, idx] *= 0.5
    return edge_mass, pair_mass


def m_step(resp: np.ndarray, g: Graph, priors: Priors):
    """Closed-form posterior concentration updates for given responsibilities.

    Returns the (mix, edge, nonedge) concentration arrays: priors plus
    soft class counts, soft edge counts, and soft non-edge counts.
    """
    q = priors.n_classes
    resp = _validate_resp(resp, g.n_vertices, q)
    _check_prior_symmetry(g, priors)
    return _m_step_arrays(resp, _as_float_adj(g), g.directed, priors)


def _m_step_arrays(resp, adj, directed, priors: Priors):
    edge_mass, pair_mass = _pair_masses(resp, adj, directed)
    mix = priors.mix + resp.sum(axis=0)
    edge = priors.edge + edge_mass
    nonedge = priors.nonedge + (pair_mass - edge_mass)
    return mix, edge, nonedge


def _check_prior_symmetry(g: Graph, priors: Priors):
    if not g.directed:
        if not np.array_equal(priors.edge, priors.edge.T) or not np.array_equal(
            priors.nonedge, priors.nonedge.T
        ):
            raise ValueError("undirected graphs need symmetric edge/nonedge priors")


def _expected_log_weights(state: VariationalState):
    """Digamma-based expectations feeding the responsibility update."""
    base = digamma(state.mix) - digamma(float(state.mix.sum()))
    dig_edge = digamma(state.edge)
    dig_non = digamma(state.nonedge)
    dig_tot = digamma(state.edge + state.nonedge)
    w_edge = dig_edge - dig_non
    w_nonedge = dig_non - dig_tot
    return base, w_edge, w_nonedge


def _fixed_point(resp, adj, base, w_edge, w_nonedge, directed, opts: FitOptions):
    """Iterate the responsibility update to tolerance; returns (resp, sweeps).

    Shared by the Bayesian and frequentist E-steps: `base` is the per-class
    additive term and the weight matrices carry the pairwise terms.
    """
    resp = np.ascontiguousarray(resp, dtype=np.float64).copy()
    base = np.ascontiguousarray(base, dtype=np.float64)
    w_edge = np.ascontiguousarray(w_edge, dtype=np.float64)
    w_nonedge = np.ascontiguousarray(w_nonedge, dtype=np.float64)
    sweeps = 0
    if opts.update_order == "sequential":
        col_sums = resp.sum(axis=0)
        kern = _kernels.sweep_sequential_directed if directed else _kernels.sweep_sequential
        for sweeps in range(1, opts.max_sweeps + 1):
            delta = kern(resp, adj, base, w_edge, w_nonedge, col_sums)
            if not np.isfinite(delta):
                raise NumericalError(f"non-finite responsibility update at sweep {sweeps}")
            if delta < opts.resp_tol:
                break
    else:
        for sweeps in range(1, opts.max_sweeps + 1):
            col = resp.sum(axis=0)
            logits = base[None, :] + (col[None, :] - resp) @ w_nonedge.T
            logits += (adj @ resp) @ w_edge.T
            if directed:
                logits += (col[None, :] - resp) @ w_nonedge
                logits += (adj.T @ resp) @ w_edge
            if not np.all(np.isfinite(logits)):
                raise NumericalError(f"non-finite responsibility update at sweep {sweeps}")
            logits -= logits.max(axis=1, keepdims=True)
            # stay above exp underflow: subnormal results are floored anyway
            # and cost an order of magnitude more to produce
            np.clip(logits, -690.0, None, out=logits)
            new = np.exp(logits)
            new /= new.sum(axis=1, keepdims=True)
            np.clip(new, _RESP_FLOOR, None, out=new)
            new /= new.sum(axis=1, keepdims=True)
            if opts.damping < 1.0:
                new = opts.damping * new + (1.0 - opts.damping) * resp
            delta = float(np.abs(new - resp).sum())
            resp = new
            if delta < opts.resp_tol:
                break
    return resp, sweeps


def e_step(state: VariationalState, g: Graph, priors: Priors, opts: FitOptions | None = None):
    """Fixed point on the responsibilities given the current concentrations.

    The priors argument is accepted for interface symmetry; the update
    depends on them only through the state produced by m_step.
    """
    opts = opts or FitOptions()
    resp = _validate_resp(state.resp, state.resp.shape[0], state.n_classes)
    base, w_edge, w_nonedge = _expected_log_weights(state)
    new, _ = _fixed_point(resp, _as_float_adj(g), base, w_edge, w_nonedge, g.directed, opts)
    return new


def _entropy(resp: np.ndarray) -> float:
    pos = resp[resp > 0]
    return -float((pos * np.log(pos)).sum())


def _pair_index(q: int, directed: bool):
    if directed:
        return np.indices((q, q)).reshape(2, -1)
    return np.triu_indices(q)


def lower_bound_simplified(state: VariationalState, g: Graph, priors: Priors) -> float:
    """Bound in the post-M-step form: Dirichlet and Beta normalizer ratios
    plus the responsibility entropy.  Only valid when the concentrations
    are the m_step image of the current responsibilities."""
    mix0 = priors.mix
    dir_part = (
        ln_gamma(float(mix0.sum()))
        - float(ln_gamma(mix0).sum())
        + float(ln_gamma(state.mix).sum())
        - ln_gamma(float(state.mix.sum()))
    )
    rows, cols = _pair_index(priors.n_classes, g.directed)
    beta_part = float(
        (
            ln_beta(state.edge[rows, cols], state.nonedge[rows, cols])
            - ln_beta(priors.edge[rows, cols], priors.nonedge[rows, cols])
        ).sum()
    )
    return dir_part + beta_part + _entropy(state.resp)


def lower_bound_general(state: VariationalState, g: Graph, priors: Priors) -> float:
    """Bound valid at any state: the simplified form plus correction terms
    that vanish exactly when the concentrations satisfy the M-step."""
    adj = _as_float_adj(g)
    edge_mass, pair_mass = _pair_masses(state.resp, adj, g.directed)
    rows, cols = _pair_index(priors.n_classes, g.directed)

    dig_edge = digamma(state.edge) - digamma(state.edge + state.nonedge)
    dig_non = digamma(state.nonedge) - digamma(state.edge + state.nonedge)
    corr_edge = (priors.edge - state.edge + edge_mass) * dig_edge
    corr_non = (priors.nonedge - state.nonedge + (pair_mass - edge_mass)) * dig_non
    beta_corr = float((corr_edge[rows, cols] + corr_non[rows, cols]).sum())

    col = state.resp.sum(axis=0)
    dig_mix = digamma(state.mix) - digamma(float(state.mix.sum()))
    mix_corr = float(((priors.mix - state.mix + col) * dig_mix).sum())

    value = beta_corr + mix_corr + lower_bound_simplified(state, g, priors)
    if not np.isfinite(value):
        raise NumericalError("non-finite lower bound")
    return value


def fit(
    g: Graph,
    q: int,
    priors: Priors | None = None,
    init_resp: np.ndarray | None = None,
    opts: FitOptions | None = None,
) -> FitResult:
    """Run variational Bayes EM from an initial responsibility matrix.

    The first action is an M-step on the initial responsibilities; the
    simplified bound is recorded after every M-step and the loop stops
    when it moves by less than ``opts.elbo_tol`` (convergence) or after
    ``opts.max_cycles`` E+M cycles (returned with converged=False).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > g.n_vertices:
        raise ValueError(f"q={q} exceeds the number of vertices {g.n_vertices}")
    priors = priors or Priors.jeffreys(q)
    if priors.n_classes != q:
        raise ValueError("priors sized for a different number of classes")
    _check_prior_symmetry(g, priors)
    opts = opts or FitOptions()
    if init_resp is None:
        from .initializers import ward_init

        init_resp = ward_init(g, q)
    resp = _validate_resp(init_resp, g.n_vertices, q)

    adj = _as_float_adj(g)
    mix, edge, nonedge = _m_step_arrays(resp, adj, g.directed, priors)
    state = VariationalState(resp, mix, edge, nonedge)
    trace = [lower_bound_simplified(state, g, priors)]

    converged = False
    cycles = 0
    for cycles in range(1, opts.max_cycles + 1):
        base, w_edge, w_nonedge = _expected_log_weights(state)
        resp, _ = _fixed_point(state.resp, adj, base, w_edge, w_nonedge, g.directed, opts)
        mix, edge, nonedge = _m_step_arrays(resp, adj, g.directed, priors)
        state = VariationalState(resp, mix, edge, nonedge)
        trace.append(lower_bound_simplified(state, g, priors))
        if abs(trace[-1] - trace[-2]) < opts.elbo_tol:
            converged = True
            break
    return FitResult(state, trace, trace[-1], converged, cycles)


def ilvb(result: FitResult) -> float:
    """Model-selection score: the simplified bound at convergence."""
    return result.ilvb


def map_labels(resp: np.ndarray) -> np.ndarray:
    """Per-vertex argmax class; ties resolve to the lowest class index."""
    return np.argmax(resp, axis=1).astype(np.int64)


def fit_result_to_document(result: FitResult, include_resp: bool = False) -> dict:
    """JSON-ready summary of a fit; responsibilities included on request
    (the document key is "tau", the wire name of the responsibilities)."""
    doc = {
        "q": result.q,
        "ilvb": result.ilvb,
        "converged": result.converged,
        "iterations": result.iterations,
        "elbo_trace": [float(v) for v in result.elbo_trace],
        "map_labels": map_labels(result.state.resp).tolist(),
    }
    if include_resp:
        doc["tau"] = result.state.resp.tolist()
    return doc


def fit_result_from_document(doc: dict, g: Graph, priors: Priors) -> FitResult:
    """Rebuild a FitResult from a document carrying responsibilities.

    The concentrations are recomputed with m_step, which reproduces the
    post-M-step state the fit ended in.
    """
    if "tau" not in doc:
        raise ValueError("document lacks responsibilities; emit them when fitting")
    resp = np.asarray(doc["tau"], dtype=float)
    mix, edge, nonedge = m_step(resp, g, priors)
    state = VariationalState(_validate_resp(resp, g.n_vertices, priors.n_classes), mix, edge, nonedge)
    return FitResult(
        state,
        [float(v) for v in doc["elbo_trace"]],
        float(doc["ilvb"]),
        bool(doc["converged"]),
        int(doc["iterations"]),
    )
