import argparse
import json
import logging
import os
import sys
from typing import List, Optional

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from src.config_loader import get_config
from src.errors import CapacityError, CheckFailure, DomainError, SpexlabError, UsageError
from src.gaps.measures import (comb_gap, comb_gap_delta, comb_gap_fractional, psi_graph, relation_check,
                               vertex_expansion_graph)
from src.graph.core import WeightedGraph, small_set_expansion
from src.graph.generators import FAMILIES, generate
from src.graph.graph_io import format_graph, read_graph_file, write_graph_file
from src.hypercube.counterexample import counterexample_report, esp_on_balls
from src.hypercube.model import HypercubeModel, ball_profiles, coordinate_cut_expansion
from src.report import FORMATS, ExperimentReport, emit
from src.verification.battery import load_battery
from src.verification.checks import CHECKS, CheckContext, check_labels, run_checks
from src.walks.evolving_sets import esp_local_partition
from src.walks.lscurve import curve_of, gap_envelope
from src.walks.random_walk import (MassVector, heat_kernel_coefficients, level_set_partition,
                                   pagerank_coefficients, walk_profile, walk_vectors)

logger = logging.getLogger("spexlab")

# Subcommands whose natural output is one row per step
RECORD_COMMANDS = {"curve", "walk", "esp"}


def status(message: str) -> None:
    print(message, file=sys.stderr)


def parse_param(text: str):
    """key=value with the value read as int, float or string."""
    if "=" not in text:
        raise UsageError(f"--param expects key=value, got {text!r}")
    key, value = text.split("=", 1)
    for cast in (int, float):
        try:
            return key, cast(value)
        except ValueError:
            pass
    return key, value


def require_seed(args, what: str) -> int:
    if args.seed is None:
        raise UsageError(f"{what} is stochastic; pass --seed N")
    return args.seed


def load_graph(args) -> WeightedGraph:
    if not args.graph:
        raise UsageError(f"spexlab {args.command} needs --graph PATH")
    graph = read_graph_file(args.graph)
    status(f"📈 Loaded {graph.name or args.graph}: n={graph.n}, vol={graph.total_volume:g}")
    return graph


def subject_of(graph: WeightedGraph) -> dict:
    return {"graph": graph.name, "n": graph.n, "volume": graph.total_volume,
            "unit_regular": graph.regular_unit, "lazy": graph.lazy}


def cmd_graph(args) -> Optional[ExperimentReport]:
    if args.family is None:
        raise UsageError("spexlab graph needs --family")
    params = dict(parse_param(p) for p in args.param or [])
    if args.lazy is not None:
        params["lazy"] = args.lazy
    graph = generate(args.family, **params)
    if args.out:
        write_graph_file(graph, args.out)
        status(f"✅ Wrote {graph.name} to {args.out}")
    else:
        args.stdout.write(format_graph(graph))
    return None


def cmd_curve(args) -> ExperimentReport:
    graph = load_graph(args)
    phi_bar = comb_gap(graph).value if graph.regular_unit else None
    vectors = walk_vectors(graph, MassVector.point(graph.n, args.seed_vertex), args.steps)
    xs = np.arange(graph.n + 1)
    records = []
    for t in range(args.start, args.steps + 1):
        values = curve_of(graph, vectors[t])(xs)
        for x, value in zip(xs, values):
            envelope = gap_envelope(phi_bar, t, float(x), graph.n) if phi_bar is not None else None
            records.append({"t": t, "x": int(x), "curve": float(value), "envelope": envelope})
    return ExperimentReport(args.argv, subject_of(graph), None, records,
                            {"seed_vertex": args.seed_vertex, "gap": phi_bar})


def cmd_walk(args) -> ExperimentReport:
    graph = load_graph(args)
    records = [{"t": r.step, "distance": r.distance, "best_expansion": r.best_expansion,
                "best_size": r.best_size}
               for r in walk_profile(graph, args.seed_vertex, args.steps)]
    summary = {"seed_vertex": args.seed_vertex}
    if args.pagerank is not None:
        found, value = level_set_partition(graph, args.seed_vertex, pagerank_coefficients(args.pagerank, args.steps))
        summary["pagerank"] = {"alpha": args.pagerank, "set": list(found.members), "expansion": value}
    if args.heat is not None:
        found, value = level_set_partition(graph, args.seed_vertex, heat_kernel_coefficients(args.heat, args.steps))
        summary["heat_kernel"] = {"temperature": args.heat, "set": list(found.members), "expansion": value}
    return ExperimentReport(args.argv, subject_of(graph), None, records, summary)


def cmd_esp(args) -> ExperimentReport:
    graph = load_graph(args)
    seed = require_seed(args, "spexlab esp")
    run = esp_local_partition(graph, args.seed_vertex, step_cap=args.steps, size_budget=args.budget,
                              phi_target=args.target, seed=seed, volume_biased=args.volume_biased)
    records = [{"t": s.step, "size": s.vertex_set.size, "volume": s.vertex_set.volume,
                "expansion": s.expansion, "u": s.u}
               for s in run.trajectory.steps]
    summary = {
        "best_set": list(run.vertex_set.members),
        "expansion": run.expansion,
        "termination": run.trajectory.termination.value,
        "within_budget": run.within_budget,
        "volume_biased": args.volume_biased,
    }
    status(f"🔧 ESP summary: {json.dumps(summary, sort_keys=True)}")
    return ExperimentReport(args.argv, subject_of(graph), seed, records, summary)


def cmd_gaps(args) -> ExperimentReport:
    graph = load_graph(args)
    summary = {}
    try:
        summary["comb_gap"] = comb_gap(graph).as_dict()
    except DomainError as e:
        # general graphs still get expansion quantities and the fractional gap
        status(f"⚠️  {e}; regular-graph gap quantities skipped")
        summary["not_regular"] = str(e)
    try:
        phi, witness = small_set_expansion(graph, 0.5)
        summary["expansion"] = {"value": phi, "witness": list(witness.members)}
        phi_v, witness = vertex_expansion_graph(graph)
        summary["vertex_expansion"] = {"value": phi_v, "witness": list(witness.members)}
        psi, witness = psi_graph(graph)
        summary["psi"] = {"value": psi, "witness": list(witness.members)}
        if args.delta is not None:
            sse, witness = small_set_expansion(graph, args.delta)
            summary["small_set_expansion"] = {"delta": args.delta, "value": sse, "witness": list(witness.members)}
            if graph.regular_unit:
                summary["comb_gap_delta"] = comb_gap_delta(graph, args.delta).as_dict()
                lhs, rhs = relation_check(graph, args.delta)
                summary["relation"] = {"gap_half_delta": lhs, "half_expansion": rhs, "holds": lhs >= rhs - 1e-9}
    except CapacityError as e:
        status(f"⚠️  {e}; exhaustive quantities skipped")
        summary["skipped"] = str(e)
    if args.fractional:
        summary["comb_gap_fractional"] = comb_gap_fractional(graph, restarts=args.restarts,
                                                             seed=args.seed or 0).as_dict()
    return ExperimentReport(args.argv, subject_of(graph), args.seed, [], summary)


def cmd_hypercube(args) -> ExperimentReport:
    model = HypercubeModel(args.k, args.dim, args.eps, explore=args.explore)
    sizes, expansions = ball_profiles(model)
    records = [{"r": r, "size_fraction": float(sizes[r]), "expansion": float(expansions[r])}
               for r in range(model.d + 1)]
    cut = coordinate_cut_expansion(model)
    summary = {"coordinate_cut": cut._asdict()}
    failure = None
    if args.report:
        if args.cap is None:
            raise UsageError("--report needs --cap C (size fraction)")
        report = counterexample_report(model, args.cap, threshold=args.threshold)
        summary["report"] = report.as_dict()
        if not (report.passes or report.vacuous or report.degenerate):
            failure = CheckFailure("hypercube", f"a ball within size {args.cap:g} expands by "
                                   f"{report.min_ball_expansion:.4g} < {report.threshold:g}",
                                   {"certified_cap": report.certified_cap})
    seed = None
    if args.esp:
        seed = require_seed(args, "spexlab hypercube --esp")
        trajectory = esp_on_balls(model, args.steps, np.random.default_rng(np.random.SeedSequence(seed)),
                                  volume_biased=args.volume_biased)
        summary["esp"] = {"radii": trajectory.radii, "size_fractions": trajectory.size_fractions,
                          "expansions": trajectory.expansions, "thresholds": trajectory.thresholds,
                          "walker_weights": trajectory.walker_weights}
    subject = {"k": model.k, "d": model.d, "eps": model.eps, "log_n": model.log_n}
    result = ExperimentReport(args.argv, subject, seed, records, summary)
    if failure is not None:
        failure.report = result
        raise failure
    return result


def cmd_verify(args) -> Optional[ExperimentReport]:
    config = get_config()
    if args.list:
        labels = check_labels(config)
        for name, check in CHECKS.items():
            doc = (check.__doc__ or "").strip().splitlines()
            label = f" [{labels[name]}]" if name in labels else ""
            args.stdout.write(f"{name}{label}: {doc[0] if doc else ''}\n")
        return None
    seed = require_seed(args, "spexlab verify")
    battery = load_battery(args.battery, config)
    status(f"🔍 Running verification on {len(battery)} graphs (seed {seed})")
    workers = args.workers or int(config.get("verify.workers", 1))
    results = run_checks(CheckContext(battery, seed, config), args.checks, workers)
    for result in results:
        mark = "✅" if result.passed else "❌"
        tag = "" if result.asserted else " (reported)"
        label = f" [{result.label}]" if result.label else ""
        status(f"{mark} {result.name}{label}{tag}: {result.cases} cases, max violation {result.max_violation:.3g}")
        if not result.passed:
            status(f"   witness: {result.witness}")
    report = ExperimentReport(args.argv, {"battery": args.battery or config.get("verify.battery", "all"),
                                             "graphs": [entry.name for entry in battery]},
                              seed, [], {"checks_run": len(results),
                                         "failed": [r.name for r in results if not r.passed]},
                              [r.as_dict() for r in results])
    if not report.passed:
        failure = CheckFailure("verify", f"{len(report.summary['failed'])} check(s) failed",
                               report.summary["failed"])
        failure.report = report
        raise failure
    return report


def build_parser() -> argparse.ArgumentParser:
    families = ", ".join(sorted(FAMILIES))
    parser = argparse.ArgumentParser(
        prog="spexlab",
        description="Random walks, evolving sets and small-set expansion experiments.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""Graph families: {families}
Exit codes: 0 success, 1 check failure, 2 usage error, 3 capacity error.

Examples:
  spexlab graph --family complete --param n=4 --out k4.txt
  spexlab gaps --graph k4.txt --delta 0.5
  spexlab esp --graph k4.txt --seed-vertex 0 --steps 20 --seed 3 --volume-biased
  spexlab hypercube --k 8 --dim 128 --eps 0.1 --report --cap 0.01
  spexlab verify --seed 7""")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--graph', type=str, help='Graph file (see docs for the format)')
    common.add_argument('--out', type=str, help='Write the report here instead of stdout')
    common.add_argument('--format', choices=FORMATS, help='Report format (curve/walk/esp default to csv)')
    common.add_argument('--seed', type=int, help='Random seed (required by stochastic commands)')
    common.add_argument('--steps', type=int, default=20, help='Steps to run (default: 20)')
    common.add_argument('--seed-vertex', type=int, default=0, help='Start vertex (default: 0)')
    common.add_argument('--max-n', type=int, help='Override the 2^n brute-force guard')
    common.add_argument('--timestamp', action='store_true', help='Include the creation time in the report')
    common.add_argument('--verbose', '-v', action='count', default=0, help='-v for INFO, -vv for DEBUG logs')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('graph', parents=[common], help='Generate a graph file')
    p.add_argument('--family', type=str, help=f'One of: {families}')
    p.add_argument('--param', action='append', help='Family parameter key=value (repeatable)')
    p.add_argument('--lazy', type=float, help='Lazify with this holding probability')

    p = sub.add_parser('curve', parents=[common], help='LS curves of A^t chi_v with the gap envelope')
    p.add_argument('--start', type=int, default=0, help='First step to emit (default: 0)')

    p = sub.add_parser('walk', parents=[common], help='Walk distance and sweep cuts per step')
    p.add_argument('--pagerank', type=float, help='Also sweep the pagerank vector with this teleport probability')
    p.add_argument('--heat', type=float, help='Also sweep the heat-kernel vector with this temperature')

    p = sub.add_parser('esp', parents=[common], help='Evolving set local partitioning')
    p.add_argument('--budget', type=float, help='Volume budget (default: half the total volume)')
    p.add_argument('--target', type=float, default=0.0, help='Stop once expansion is at most this')
    p.add_argument('--volume-biased', action='store_true', help='Use the volume-biased process')

    p = sub.add_parser('gaps', parents=[common], help='Combinatorial gap and expansion quantities')
    p.add_argument('--delta', type=float, help='Small-set size fraction')
    p.add_argument('--fractional', action='store_true', help='Also run the fractional gap heuristic')
    p.add_argument('--restarts', type=int, default=20, help='Heuristic restarts (default: 20)')

    p = sub.add_parser('hypercube', parents=[common], help='Noisy hypercube counterexample')
    p.add_argument('--k', type=int, default=8, help='Alphabet size (default: 8)')
    p.add_argument('--dim', type=int, default=128, help='Dimension (default: 128)')
    p.add_argument('--eps', type=float, default=0.1, help='Noise rate (default: 0.1)')
    p.add_argument('--explore', action='store_true', help='Allow eps above 1/2')
    p.add_argument('--report', action='store_true', help='Compare the coordinate cut with small balls')
    p.add_argument('--cap', type=float, help='Ball size-fraction cap for --report')
    p.add_argument('--threshold', type=float, help='Required ball expansion (default: 1 - eps)')
    p.add_argument('--esp', action='store_true', help='Run the evolving set process on balls')
    p.add_argument('--volume-biased', action='store_true', help='Volume-biased ball process')

    p = sub.add_parser('verify', parents=[common], help='Run the verification suite')
    p.add_argument('--battery', type=str, help='Battery preset (default from config)')
    p.add_argument('--checks', nargs='+', help='Only these checks (registry names or labels)')
    p.add_argument('--workers', type=int, help='Threads for independent checks')
    p.add_argument('--list', action='store_true', help='List the available checks and exit')
    return parser


COMMANDS = {
    'graph': cmd_graph,
    'curve': cmd_curve,
    'walk': cmd_walk,
    'esp': cmd_esp,
    'gaps': cmd_gaps,
    'hypercube': cmd_hypercube,
    'verify': cmd_verify,
}


def configure_logging(verbose: int) -> None:
    config_level = str(get_config().get("logging.level", "WARNING")).upper()
    level = {0: getattr(logging, config_level, logging.WARNING), 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def run(argv: Optional[List[str]] = None, stdout=None) -> int:
    """Parse argv, run the subcommand, write its report and return the exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else UsageError.exit_code
    args.argv = list(sys.argv[1:] if argv is None else argv)
    args.stdout = stdout
    configure_logging(args.verbose)
    config = get_config()
    if args.max_n is not None:
        config.set("graph.max_n", args.max_n)
    fmt = args.format or ("csv" if args.command in RECORD_COMMANDS else config.get("output.format", "json"))

    report, code = None, 0
    try:
        report = COMMANDS[args.command](args)
    except SpexlabError as e:
        status(f"❌ {e}")
        report, code = getattr(e, "report", None), e.exit_code
    except FileNotFoundError as e:
        status(f"❌ File not found: {e.filename}")
        code = UsageError.exit_code
    if report is not None:
        try:
            written = emit(report, fmt, args.out, stdout, args.timestamp)
        except SpexlabError as e:
            status(f"❌ {e}")
            return e.exit_code
        if written:
            status(f"✅ Report saved to {written}")
    return code


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
