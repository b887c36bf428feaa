"""
Command-Line Frontend
---------------------
Subcommands:
    degrees  degree sequences, n and m of an edge list
    fit      fitted propensities Omega and the graph-induced Xi
    expect   expected adjacency of an ensemble (mean system)
    sample   seeded ensemble samples as edge-list blocks
    pmf      log-probability of a graph under an ensemble
    test     per-dyad p-values under the soft configuration null
    verify   oracle verification suite (Prefect flow)

Exit codes: 0 success, 1 verification or numerical failure,
2 input error, 3 infeasible model.

Usage:
    python -m ghype degrees graph.tsv --directed
    python -m ghype sample --xi xi.json --omega uniform --m 100 --count 5 --seed 7
"""

import argparse
import json
import math
import os
import sys
from typing import List, Optional, Tuple

import numpy as np

from ghype.config import (
    DEFAULT_SEED,
    MEAN_REL_TOL,
    QUAD_REL_TOL,
    VERIFY_INSTANCES,
    VERIFY_MAX_M,
    VERIFY_MAX_N,
    VERIFY_TRIALS,
)
from ghype.exceptions import (
    GHypEError,
    InfeasibleModelError,
    InputError,
    SaturatedDyadError,
)
from ghype.models.graph import (
    CombinatorialMatrix,
    MultiGraph,
    build_graph,
    combinatorial_matrix_from_graph,
    degree_sequences,
)
from ghype.models.soft_config import SoftConfigModel, dyad_pvalues, log_pmf, sample_many
from ghype.models.wallenius import (
    GHypEModel,
    PropensityMatrix,
    fit_propensity,
    log_pmf_wallenius,
    mean_wallenius,
    sample_ghype_many,
)
from ghype.utils.file_io import (
    integer_matrix,
    load_graph,
    matrix_payload,
    read_edge_list,
    read_matrix,
    write_edge_blocks,
    write_matrix,
)
from ghype.utils.logging_config import setup_logger
from ghype.utils.numeric import QuadratureConfig
from ghype.verification import run_all_checks

log = setup_logger("cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _finite_or_text(x: float):
    return x if math.isfinite(x) else ("-inf" if x < 0 else "inf")


def _load_ensemble(args) -> Tuple[CombinatorialMatrix, Optional[PropensityMatrix], List[str]]:
    """Xi and Omega files from --xi/--omega; Omega is None for 'uniform'."""
    xi_file = read_matrix(args.xi)
    xi = CombinatorialMatrix(xi=integer_matrix(xi_file, "Xi"), directed=xi_file.directed)
    if args.omega == "uniform":
        return xi, None, xi_file.labels

    omega_file = read_matrix(args.omega)
    if omega_file.n != xi_file.n or omega_file.directed != xi_file.directed:
        raise InputError(f"{args.omega} does not match {args.xi} in size or directedness")
    if omega_file.labels != xi_file.labels:
        raise InputError(f"{args.omega} and {args.xi} use different vertex labels")
    omega = PropensityMatrix(omega=omega_file.matrix, directed=omega_file.directed)
    return xi, omega, xi_file.labels


def _graph_on_labels(path: str, labels: List[str], directed: bool) -> MultiGraph:
    """Edge list mapped onto an existing label set."""
    edges = read_edge_list(path)
    index = {label: i for i, label in enumerate(labels)}
    triples = []
    for src, dst, multiplicity, line in edges.itertuples(index=False):
        if src not in index or dst not in index:
            unknown = src if src not in index else dst
            raise InputError(f"{path}:{line}: unknown vertex label {unknown!r}")
        triples.append((index[src], index[dst], multiplicity))
    return build_graph(triples, n=len(labels), directed=directed)


def cmd_degrees(args) -> int:
    lg = load_graph(args.input, args.directed)
    degrees = degree_sequences(lg.graph)
    report = {"n": lg.graph.n, "m": lg.graph.m, "directed": args.directed, "labels": lg.labels}
    if args.directed:
        report["k_out"] = degrees.k_out.tolist()
        report["k_in"] = degrees.k_in.tolist()
    else:
        report["k"] = degrees.k.tolist()
    _emit(report)
    return EXIT_OK


def cmd_fit(args) -> int:
    lg = load_graph(args.input, args.directed)
    xi = combinatorial_matrix_from_graph(lg.graph)
    try:
        omega = fit_propensity(lg.graph, xi)
    except SaturatedDyadError as exc:
        log.error(
            f"Dyad ({lg.labels[exc.i]}, {lg.labels[exc.j]}) is saturated: "
            f"{exc.multiplicity} edges for {exc.balls} balls"
        )
        raise

    if args.output:
        os.makedirs(args.output, exist_ok=True)
        write_matrix(os.path.join(args.output, "omega.json"), omega.omega, lg.labels, args.directed)
        write_matrix(os.path.join(args.output, "xi.json"), xi.xi, lg.labels, args.directed)
    else:
        _emit({
            "omega": matrix_payload(omega.omega, lg.labels, args.directed),
            "xi": matrix_payload(xi.xi, lg.labels, args.directed),
        })
    return EXIT_OK


def cmd_expect(args) -> int:
    xi, omega, labels = _load_ensemble(args)
    if omega is None:
        model = GHypEModel.uniform(xi, args.m)
    else:
        model = GHypEModel(xi=xi, omega=omega, m=args.m)
    expected = mean_wallenius(model, rel_tol=args.tol or MEAN_REL_TOL)
    write_matrix(args.output, expected, labels, xi.directed)
    return EXIT_OK


def cmd_sample(args) -> int:
    xi, omega, labels = _load_ensemble(args)
    if omega is None:
        graphs = sample_many(SoftConfigModel(xi=xi, m=args.m), args.count, args.seed)
    else:
        graphs = sample_ghype_many(GHypEModel(xi=xi, omega=omega, m=args.m), args.count, args.seed)

    log.info("=" * 60)
    log.info(f"Sampling {args.count} graph(s) — m={args.m}, seed={args.seed}, omega={args.omega}")
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            written = write_edge_blocks(graphs, labels, fh)
    else:
        written = write_edge_blocks(graphs, labels, sys.stdout)
    log.info(f"Wrote {written} sample(s)")
    log.info("=" * 60)
    return EXIT_OK


def cmd_pmf(args) -> int:
    xi, omega, labels = _load_ensemble(args)
    g = _graph_on_labels(args.graph, labels, xi.directed)
    if omega is None:
        value = log_pmf(SoftConfigModel(xi=xi, m=args.m), g)
        ensemble = "softconfig"
    else:
        cfg = QuadratureConfig(rel_tol=args.tol or QUAD_REL_TOL)
        value = log_pmf_wallenius(GHypEModel(xi=xi, omega=omega, m=args.m), g, cfg)
        ensemble = "wallenius"

    report = {
        "ensemble": ensemble,
        "ln": _finite_or_text(value),
        "log10": _finite_or_text(value / math.log(10.0)),
    }
    if value == -math.inf:
        report["note"] = f"graph lies outside the support (m={g.m}, model draws {args.m})"
    _emit(report)
    return EXIT_OK


def cmd_test(args) -> int:
    lg = load_graph(args.input, args.directed)
    model = SoftConfigModel.from_graph(lg.graph)
    pvalues, impossible = dyad_pvalues(model, lg.graph)
    likelihood = log_pmf(model, lg.graph)

    flagged = [
        [lg.labels[i], lg.labels[j]]
        for i, j in zip(*np.nonzero(impossible))
        if args.directed or i <= j
    ]
    report = {
        "null": args.null,
        "pvalues": matrix_payload(pvalues, lg.labels, args.directed),
        "log_likelihood": _finite_or_text(likelihood),
        "impossible": flagged,
    }
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, indent=2) + "\n")
        log.info(f"Wrote dyad p-values to {args.output}")
    else:
        _emit(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.local:
        results = run_all_checks(
            max_n=args.max_n, max_m=args.max_m, seed=args.seed,
            instances=args.instances, trials=args.trials,
        )
        passed = all(r.passed for r in results)
    else:
        from orchestration.flows.verify_flow import verify_flow

        summary = verify_flow(
            max_n=args.max_n, max_m=args.max_m, seed=args.seed,
            instances=args.instances, trials=args.trials,
        )
        passed = summary["passed"]
    return EXIT_OK if passed else EXIT_FAILURE


def _add_direction(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--directed", dest="directed", action="store_true", help="Directed multigraph")
    group.add_argument("--undirected", dest="directed", action="store_false", help="Undirected multigraph (default)")
    parser.set_defaults(directed=False)


def _add_ensemble(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xi", required=True, help="Combinatorial matrix (MatrixFile JSON)")
    parser.add_argument("--omega", default="uniform", help="Propensity MatrixFile or 'uniform'")
    parser.add_argument("--m", type=int, required=True, help="Number of edges to draw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghype", description="Generalised hypergeometric ensembles of multigraphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrees", help="Degree sequences of an edge list")
    p.add_argument("input", help="Edge-list TSV ('-' for stdin)")
    _add_direction(p)
    p.set_defaults(handler=cmd_degrees)

    p = sub.add_parser("fit", help="Fit propensities to an observed graph")
    p.add_argument("input", help="Edge-list TSV ('-' for stdin)")
    _add_direction(p)
    p.add_argument("--output", help="Directory for omega.json and xi.json (default: stdout)")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("expect", help="Expected adjacency of an ensemble")
    _add_ensemble(p)
    p.add_argument("--tol", type=float, help="Relative tolerance of the mean system")
    p.add_argument("--output", help="MatrixFile path (default: stdout)")
    p.set_defaults(handler=cmd_expect)

    p = sub.add_parser("sample", help="Sample graphs from an ensemble")
    _add_ensemble(p)
    p.add_argument("--count", type=int, default=1, help="Number of graphs")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")
    p.add_argument("--output", help="Edge-list file (default: stdout)")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("pmf", help="Log-probability of a graph")
    _add_ensemble(p)
    p.add_argument("graph", help="Edge-list TSV over the labels of --xi")
    p.add_argument("--tol", type=float, help="Relative quadrature tolerance")
    p.set_defaults(handler=cmd_pmf)

    p = sub.add_parser("test", help="Per-dyad p-values under a null ensemble")
    p.add_argument("input", help="Edge-list TSV ('-' for stdin)")
    _add_direction(p)
    p.add_argument("--null", choices=["softconfig"], default="softconfig", help="Null ensemble")
    p.add_argument("--output", help="JSON report path (default: stdout)")
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("verify", help="Run the oracle verification suite")
    p.add_argument("--max-n", type=int, default=VERIFY_MAX_N)
    p.add_argument("--max-m", type=int, default=VERIFY_MAX_M)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--instances", type=int, default=VERIFY_INSTANCES)
    p.add_argument("--trials", type=int, default=VERIFY_TRIALS)
    p.add_argument("--local", action="store_true", help="Run the checks in-process without Prefect")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "count", 1) < 0:
        log.error("--count must be non-negative")
        return EXIT_INPUT
    try:
        return args.handler(args)
    except InputError as exc:
        log.error(f"Input error: {exc}")
        return EXIT_INPUT
    except InfeasibleModelError as exc:
        log.error(f"Infeasible model: {exc}")
        return EXIT_INFEASIBLE
    except GHypEError as exc:
        log.error(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
