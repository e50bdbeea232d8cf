"""Command-line front end: generate | fit | select | bench | oracle-check.

All numeric output is printed with 10 significant digits so repeated runs
diff cleanly.  Exit codes: 0 success, 1 failed oracle certification,
2 usage/file errors, 3 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bench import BenchConfig, run_bench
from .engine import FitOptions, NumericalError, Priors, fit, fit_result_to_document
from .generate import SbmParams, affiliation_matrix, hub_matrix, sample_sbm
from .graph import GraphParseError, load_edge_list, write_edge_list
from .initializers import ward_tree
from .oracle import CapacityError, exact_log_marginal
from .selection import SelectionConfig, restart_resp, select_q

__all__ = ["main", "build_parser"]

_ORACLE_MAX_N = 8
_ORACLE_MAX_Q = 3
_GAP_TOL = 1e-9


class UsageError(Exception):
    pass


def _ensure_prefix_dir(prefix: str) -> None:
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _fmt(x: float) -> str:
    return f"{float(x):.10g}"


def _round_floats(obj):
    """Recursively round floats to 10 significant digits for JSON output."""
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _dump_json(doc) -> str:
    return json.dumps(_round_floats(doc), indent=2, sort_keys=True)


def _load_graph(path: str, n: int):
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh, n)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _criteria_list(text: str) -> tuple[str, ...]:
    names = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    for name in names:
        if name not in ("ilvb", "icl"):
            raise UsageError(f"unknown criterion {name!r} (choose from ilvb, icl)")
    if not names:
        raise UsageError("--criteria must name at least one criterion")
    return names


def cmd_generate(args) -> int:
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.topology == "affiliation":
        conn = affiliation_matrix(args.q, getattr(args, "lambda"), args.eps)
    else:
        conn = hub_matrix(args.q, getattr(args, "lambda"), args.eps)
    params = SbmParams.equal_proportions(conn)
    g, labels = sample_sbm(params, args.n, args.seed)
    _ensure_prefix_dir(args.out_prefix)
    with open(f"{args.out_prefix}.edges", "w", encoding="utf-8") as fh:
        write_edge_list(g, fh)
    with open(f"{args.out_prefix}.labels", "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(int(z)) for z in labels) + "\n")
    print(f"wrote {args.out_prefix}.edges and {args.out_prefix}.labels")
    return 0


def _best_fit(g, q, restarts, opts, seed):
    tree = ward_tree(g)
    base = tree.cut(q)
    best = None
    last_err = None
    for r in range(restarts):
        try:
            result = fit(g, q, Priors.jeffreys(q), restart_resp(base, q, r, seed), opts)
        except NumericalError as exc:
            last_err = exc
            continue
        if best is None or result.ilvb > best.ilvb:
            best = result
    if best is None:
        raise NumericalError(f"all {restarts} restarts failed: {last_err}")
    return best


def cmd_fit(args) -> int:
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    g = _load_graph(args.edges, args.n)
    opts = FitOptions(elbo_tol=args.eps, resp_tol=args.eps)
    result = _best_fit(g, args.q, args.restarts, opts, args.seed)
    print(_dump_json(fit_result_to_document(result, include_resp=args.emit_tau)))
    return 0 if result.converged else 3


def cmd_select(args) -> int:
    if args.qmin < 1 or args.qmin > args.qmax:
        raise UsageError("need 1 <= --qmin <= --qmax")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    criteria = _criteria_list(args.criteria)
    g = _load_graph(args.edges, args.n)
    cfg = SelectionConfig(
        q_min=args.qmin,
        q_max=args.qmax,
        restarts=args.restarts,
        seed=args.seed,
        include_icl="icl" in criteria,
    )
    report = select_q(g, cfg)
    print("Q,restart,ilvb,converged,iterations")
    for row in report.rows:
        print(
            f"{row['q']},{row['restart']},{_fmt(row['ilvb'])},"
            f"{'true' if row['converged'] else 'false'},{row['iterations']}"
        )
    summary = {
        "q_star": report.q_star,
        "q_star_by_criterion": report.q_star_by_criterion,
        "scores": {
            name: {str(q): v for q, v in per_q.items()}
            for name, per_q in report.scores.items()
            if name in criteria
        },
    }
    print(_dump_json(summary))
    return 0


def cmd_bench(args) -> int:
    criteria = _criteria_list(args.criteria)
    q_true_set = _int_list(args.q_true)
    q_scan = _int_list(args.q_scan)
    try:
        cfg = BenchConfig(
            n_vertices=args.n,
            within=getattr(args, "lambda"),
            between=args.eps,
            q_true_set=q_true_set,
            networks_per_q=args.networks_per_q,
            q_scan=q_scan,
            restarts=args.restarts,
            topology=args.topology,
            seed=args.seed,
            criteria=criteria,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    matrices = run_bench(cfg)
    _ensure_prefix_dir(args.out_prefix)
    summary = {"criteria": {}}
    for name, matrix in matrices.items():
        path = f"{args.out_prefix}_confusion_{name}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(matrix.to_csv())
        summary["criteria"][name] = {
            "confusion_csv": path,
            "diagonal_fraction": matrix.overall_diagonal_fraction(),
            "per_q_true": {str(q): v for q, v in matrix.diagonal_fractions().items()},
        }
    summary_path = f"{args.out_prefix}_summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(_dump_json(summary) + "\n")
    print(_dump_json(summary))
    return 0


def cmd_oracle_check(args) -> int:
    if args.n > _ORACLE_MAX_N:
        raise UsageError(f"--n must be <= {_ORACLE_MAX_N} for exact enumeration")
    if args.q > _ORACLE_MAX_Q:
        raise UsageError(f"--q must be <= {_ORACLE_MAX_Q} for exact enumeration")
    if args.q < 1 or args.n < 1:
        raise UsageError("--n and --q must be >= 1")
    g = _load_graph(args.edges, args.n)
    exact = exact_log_marginal(g, args.q)
    opts = FitOptions(elbo_tol=1e-12, resp_tol=1e-12)
    bound = _best_fit(g, args.q, restarts=3, opts=opts, seed=0).ilvb
    gap = exact - bound
    print(f"lower_bound: {_fmt(bound)}")
    print(f"exact_log_marginal: {_fmt(exact)}")
    print(f"gap: {_fmt(gap)}")
    return 1 if gap < -_GAP_TOL else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbmvb",
        description="Bayesian stochastic block model inference and model selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a block-model graph to disk")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lambda", type=float, default=0.9)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--topology", choices=("affiliation", "hubs"), default="affiliation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a fixed-Q model to an edge list")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-tau", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="sweep Q and report the criterion maximizer")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--qmin", type=int, required=True)
    p.add_argument("--qmax", type=int, required=True)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--criteria", default="ilvb")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="confusion-matrix benchmark on synthetic graphs")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--lambda", type=float, default=0.9)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--q-true", default="3,4,5,6,7")
    p.add_argument("--networks-per-q", type=int, default=20)
    p.add_argument("--q-scan", default="1,2,3,4,5,6,7")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--topology", choices=("affiliation", "hubs"), default="affiliation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--criteria", default="ilvb")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle-check", help="certify the bound against exact enumeration")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (GraphParseError, CapacityError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
