"""
Command line front end.

    curve-proximity query   --curve FILE | --bundle DIR | --builtin NAME  [query flags]
    curve-proximity gen     FAMILY --out DIR [family flags]
    curve-proximity verify  --proofset FILE [curve source] [query flags]
    curve-proximity replay  --trace FILE [query flags]
    curve-proximity opt     [curve source] [query flags] [--grid-step STEP]
    curve-proximity lemmas  NAME [--trials N] [--seed S]
    curve-proximity bench   --families ... --epsilons ... --ks ... --seeds ... --out CSV

Exit codes: 0 success, 1 verification failure, 2 usage or malformed input,
3 sample budget or oracle cap exceeded.
"""
import argparse
import os
import sys

from fractions import Fraction
from typing import Any, Dict, List, Optional

from curve_proximity.config import BENCH_JOBS, BENCH_OUTPUT_DIRECTORY, DEFAULT_SEED, LOGGER, VERSION
from curve_proximity.helper.bench import BENCH_FAMILIES, bench_cells, run_bench, summary_path, write_csv, \
    write_summary
from curve_proximity.helper.curve import CurveSpec, InstrumentedCurve, read_polyline
from curve_proximity.helper.instances import FAMILIES, build_instance, read_bundle
from curve_proximity.helper.lemmas import LEMMA_CHECKS, run_lemma_harness
from curve_proximity.helper.proofset import check, min_proofset_grid, read_proofset
from curve_proximity.helper.solver import Query, read_trace, replay, solve, uniform_baseline, write_trace
from curve_proximity.http_exceptions import CurveProximityException, OracleCapExceeded, SampleBudgetExceeded

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

# CLI flag -> generator parameter
GEN_FLAGS = {
    "k": "k",
    "epsilon": "epsilon",
    "down": "down_index",
    "seed": "seed",
    "slot": "slot",
    "height": "height",
    "point": "point",
    "kind": "kind",
    "spike_ratio": "spike_ratio",
    "vertices": "n_vertices",
    "dimension": "dimension",
    "clearance": "clearance",
}


class UsageError(Exception):
    pass


def real(text: str) -> float:
    """Float or fraction, e.g. 0.25 or 1/24."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid number: {text!r}")


def coordinates(text: str) -> List[float]:
    try:
        return [float(c) for c in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid coordinates: {text!r}")


def key_value(text: str):
    if '=' not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split('=', 1)
    return key.strip(), value.strip()


def _add_curve_source(parser: argparse.ArgumentParser, required: bool = True):
    source = parser.add_mutually_exclusive_group(required=required)
    source.add_argument("--curve", metavar="FILE", help="polyline file, one vertex per line")
    source.add_argument("--bundle", metavar="DIR", help="instance bundle directory")
    source.add_argument("--builtin", choices=sorted(FAMILIES), help="generated instance family")
    parser.add_argument("--param", type=key_value, action="append", default=[], metavar="KEY=VALUE",
                        help="parameter of the builtin family (repeatable)")
    parser.add_argument("--raw", action="store_true",
                        help="vertices sit at evenly spaced parameters over --domain, needs --lipschitz")
    parser.add_argument("--lipschitz", type=real, help="Lipschitz bound of a raw polyline")
    parser.add_argument("--domain", type=real, nargs=2, metavar=("START", "END"), default=None,
                        help="parameter domain of a raw polyline (default: 0 1)")
    parser.add_argument("--query-point", type=coordinates, metavar="X,Y[,Z...]",
                        help="query point (default: the origin)")


def _add_query_flags(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--kind", choices=["nearest", "farthest"], default="nearest" if required else None)
    parser.add_argument("--error", choices=["abs", "rel", "absolute", "relative"],
                        default="abs" if required else None)
    parser.add_argument("--epsilon", type=real, required=required)


def curve_spec_from_args(args) -> CurveSpec:
    if args.curve:
        vertices = read_polyline(args.curve).tolist()
        if args.raw:
            if args.lipschitz is None:
                raise UsageError("--raw needs --lipschitz")
            return CurveSpec("polyline", {"vertices": vertices, "lipschitz": args.lipschitz,
                                          "domain": tuple(args.domain or (0.0, 1.0))})
        if args.lipschitz is not None or args.domain is not None:
            raise UsageError("--lipschitz and --domain only apply to --raw polylines")
        return CurveSpec("polyline", {"vertices": vertices})

    if args.raw or args.lipschitz is not None or args.domain is not None:
        raise UsageError("--raw, --lipschitz and --domain only apply to --curve files")
    if args.bundle:
        return read_bundle(args.bundle).curve_spec
    return build_instance(args.builtin, **dict(args.param)).curve_spec


def query_from_args(args) -> Query:
    return Query(args.kind, args.error, args.epsilon)


def _print_fields(fields: Dict[str, Any]):
    for key, value in fields.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(repr(float(c)) for c in value)
        print(f"{key}={value}")


def _result_fields(result, back_map) -> Dict[str, Any]:
    data = result.as_primitives(back_map)
    return {k: data[k] for k in ["x_star", "point", "distance", "certified_lower", "certified_upper",
                                 "samples_used", "terminated"]}


#####################################
# Commands

def cmd_query(args) -> int:
    spec = curve_spec_from_args(args)
    curve, back_map = spec.normalize(args.query_point)
    query = query_from_args(args)
    back_map = None if args.normalized else back_map

    try:
        if args.baseline:
            result = uniform_baseline(InstrumentedCurve(curve), query)
        else:
            result = solve(InstrumentedCurve(curve), query, budget=args.budget)
    except SampleBudgetExceeded as e:
        LOGGER.error(str(e))
        if e.partial is not None:
            _print_fields(_result_fields(e.partial, back_map))
            if args.trace:
                write_trace(args.trace, e.partial.trace)
        return EXIT_LIMIT

    _print_fields(_result_fields(result, back_map))
    if args.trace:
        write_trace(args.trace, result.trace)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {}
    for flag, name in GEN_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            params[name] = value
    bundle = build_instance(args.family, **params)
    bundle.write(args.out)
    _print_fields({"family": bundle.family, "epsilon": bundle.epsilon, "out": args.out,
                   **{k: v for k, v in bundle.metadata.items() if not k.startswith("param.")}})
    return EXIT_OK


def cmd_verify(args) -> int:
    curve = None
    if args.curve or args.bundle or args.builtin:
        curve = InstrumentedCurve(curve_spec_from_args(args).build(args.query_point))

    flags = [args.kind, args.error, args.epsilon]
    if any(f is not None for f in flags) and not all(f is not None for f in flags):
        raise UsageError("--kind, --error and --epsilon must be given together")
    query = query_from_args(args) if args.epsilon is not None else None

    ps = read_proofset(args.proofset, query=query, curve=curve)
    verdict = check(ps)
    _print_fields({"passed": str(verdict.passed).lower(), "margin": verdict.margin,
                   "incumbent": verdict.incumbent, "bound": verdict.bound, "samples": len(ps)})
    if not verdict.passed:
        LOGGER.error(f"Proof set {args.proofset} does not certify the query (margin {verdict.margin})")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def cmd_replay(args) -> int:
    report = replay(read_trace(args.trace), query_from_args(args))
    for failure in report.failures:
        print(f"{failure.check}: event {failure.index}: {failure.message}")
    _print_fields({"events": report.events, "ok": str(report.ok).lower()})
    return EXIT_OK if report.ok else EXIT_VERIFICATION_FAILED


def cmd_opt(args) -> int:
    curve = curve_spec_from_args(args).build(args.query_point)
    estimate = min_proofset_grid(curve, query_from_args(args), grid_step=args.grid_step)
    _print_fields({"grid_step": estimate.grid_step,
                   "opt_est": "NA" if estimate.value is None else estimate.value,
                   "witness": estimate.witness})
    return EXIT_OK


def cmd_lemmas(args) -> int:
    report = run_lemma_harness(args.name, args.trials, seed=args.seed, dimension=args.dimension)
    _print_fields({"lemma": report.name, "trials": report.trials, "passed": report.passed,
                   "failed": report.failed, "vacuous": report.vacuous})
    return EXIT_VERIFICATION_FAILED if report.failed else EXIT_OK


def cmd_bench(args) -> int:
    cells = bench_cells(args.families, args.epsilons, args.ks, args.seeds)
    records = run_bench(cells, jobs=args.jobs, timing=not args.no_timing)

    out = args.out or os.path.join(BENCH_OUTPUT_DIRECTORY, "bench.csv")
    with open(out, 'w', newline='') as fh:
        write_csv(fh, records)
    with open(summary_path(out), 'w') as fh:
        write_summary(fh, records)
    LOGGER.info(f"Wrote {len(records)} benchmark rows to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curve-proximity",
                                     description="Nearest and farthest point queries on Lipschitz curves")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("query", help="run a nearest or farthest point query")
    _add_curve_source(p)
    _add_query_flags(p)
    p.add_argument("--trace", metavar="FILE", help="write the solver trace as JSON lines")
    p.add_argument("--normalized", action="store_true", help="report in normalized units")
    p.add_argument("--baseline", action="store_true", help="use the uniform baseline instead of the solver")
    p.add_argument("--budget", type=int, help="sample budget (default: from the configuration)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("gen", help="generate an instance bundle")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=real)
    p.add_argument("--down", type=int, help="group holding the spike toward the origin")
    p.add_argument("--seed", type=int)
    p.add_argument("--slot", type=int)
    p.add_argument("--height", type=real)
    p.add_argument("--point", type=coordinates)
    p.add_argument("--kind", choices=["nearest", "farthest"])
    p.add_argument("--spike-ratio", type=real)
    p.add_argument("--vertices", type=int)
    p.add_argument("--dimension", type=int)
    p.add_argument("--clearance", type=real)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check a proof set")
    p.add_argument("--proofset", required=True, metavar="FILE")
    _add_curve_source(p, required=False)
    _add_query_flags(p, required=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="audit a solver trace")
    p.add_argument("--trace", required=True, metavar="FILE")
    _add_query_flags(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("opt", help="grid estimate of the smallest proof set")
    _add_curve_source(p)
    _add_query_flags(p)
    p.add_argument("--grid-step", type=real, help="grid step (default: epsilon / grid_divisor)")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("lemmas", help="randomized check of the ellipse lemmas")
    p.add_argument("name", choices=list(LEMMA_CHECKS))
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dimension", type=int, default=2)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("bench", help="adaptive solver versus uniform baseline")
    p.add_argument("--families", nargs="+", choices=BENCH_FAMILIES, required=True)
    p.add_argument("--epsilons", nargs="+", type=real, required=True)
    p.add_argument("--ks", nargs="+", type=int, default=[1])
    p.add_argument("--seeds", nargs="+", type=int, default=[DEFAULT_SEED])
    p.add_argument("--out", metavar="CSV")
    p.add_argument("--jobs", type=int, default=BENCH_JOBS)
    p.add_argument("--no-timing", action="store_true", help="write millis as 0 for byte-identical reruns")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        LOGGER.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except (OracleCapExceeded, SampleBudgetExceeded) as e:
        LOGGER.error(f"{args.command}: {e}")
        return EXIT_LIMIT
    except CurveProximityException as e:
        LOGGER.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except OSError as e:
        LOGGER.error(f"{args.command}: {e}")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
