"""
Adaptive solver versus uniform baseline on generated instance families.

Each cell (family, k, epsilon, seed) builds one instance, runs the solver, the
uniform baseline and the grid OPT oracle, and becomes one CSV row. Cells may
run on a thread pool but rows are always written in cell order.
"""
import csv
import itertools
import math
import time

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Sequence, Tuple

from curve_proximity.config import BENCH_JOBS, LOGGER
from curve_proximity.helper.curve import InstrumentedCurve
from curve_proximity.helper.instances import InstanceBundle, constant_instance, hidden_spike_instance, \
    hidden_spike_slots, random_polyline, relative_segment_family, segment_instance, spike_family
from curve_proximity.helper.proofset import min_proofset_grid
from curve_proximity.helper.solver import ErrorMode, Query, QueryKind, solve, uniform_baseline
from curve_proximity.http_exceptions import InvalidParameterException, OracleCapExceeded

CSV_HEADER = ["family", "k", "epsilon", "seed", "samples", "baseline_samples", "opt_est", "ratio", "millis"]
K_FAMILIES = {"spike", "rel-segments"}
BENCH_FAMILIES = ["constant", "segment", "spike", "hidden-spike", "rel-segments", "random"]
NA = "NA"


@dataclass(frozen=True)
class BenchCell:
    family: str
    k: int
    epsilon: float
    seed: int


@dataclass
class BenchRecord:
    family: str
    k: int
    epsilon: float
    seed: int
    samples: int
    baseline_samples: Optional[int]
    opt_est: Optional[int]
    ratio: Optional[float]
    millis: int

    def row(self) -> List[str]:
        def fmt(value):
            if value is None:
                return NA
            if isinstance(value, float):
                return f"{value:.6g}"
            return str(value)
        return [fmt(getattr(self, name)) for name in CSV_HEADER]


def adaptive_ratio(samples: int, opt: int, epsilon: float) -> float:
    """samples / (OPT log2(2 + 1 / (epsilon OPT)))"""
    return samples / (opt * math.log2(2 + 1 / (epsilon * opt)))


def bench_cells(families: Sequence[str], epsilons: Sequence[float], ks: Sequence[int],
                seeds: Sequence[int]) -> List[BenchCell]:
    if not families or not epsilons or not ks or not seeds:
        raise InvalidParameterException("Every benchmark parameter list needs at least one value")
    unknown = [f for f in families if f not in BENCH_FAMILIES]
    if unknown:
        raise InvalidParameterException(f"Unknown benchmark families {unknown}. Valid families are: "
                                        f"{BENCH_FAMILIES}")

    cells, seen = [], set()
    for family, eps, k, seed in itertools.product(families, epsilons, ks, seeds):
        cell = BenchCell(family, int(k) if family in K_FAMILIES else 1, float(eps), int(seed))
        if cell not in seen:
            seen.add(cell)
            cells.append(cell)
    return cells


def cell_instance(cell: BenchCell) -> Tuple[InstanceBundle, Query]:
    eps = cell.epsilon
    nearest_abs = Query(QueryKind.NEAREST, ErrorMode.ABSOLUTE, eps) if eps < 0.5 else None

    if cell.family == "rel-segments":
        bundle = relative_segment_family(cell.k, eps, seed=cell.seed)
        return bundle, Query(QueryKind.NEAREST, ErrorMode.RELATIVE, eps)

    if nearest_abs is None:
        raise InvalidParameterException(f"Family '{cell.family}' needs epsilon < 1/2, got {eps}")
    if cell.family == "constant":
        bundle = constant_instance((0.0, 1.0), eps)
    elif cell.family == "segment":
        bundle = segment_instance(0.3, eps)
    elif cell.family == "spike":
        bundle = spike_family(cell.k, eps, seed=cell.seed)
    elif cell.family == "hidden-spike":
        bundle = hidden_spike_instance(eps, slot=1 + cell.seed % hidden_spike_slots(eps))
    else:
        bundle = random_polyline(8, 2, cell.seed, 0.5, eps)
    return bundle, nearest_abs


def baseline_query(bundle: InstanceBundle, query: Query) -> Query:
    """The uniform baseline only answers absolute queries; relative ones use the equivalent absolute tolerance."""
    if query.absolute:
        return query
    eps = min(query.epsilon * bundle.d_min / (1 + query.epsilon), 0.49)
    return Query(query.kind, ErrorMode.ABSOLUTE, eps)


def run_cell(cell: BenchCell, timing: bool = True) -> BenchRecord:
    start = time.perf_counter()
    bundle, query = cell_instance(cell)
    curve = bundle.curve()

    result = solve(InstrumentedCurve(curve), query)
    baseline = uniform_baseline(InstrumentedCurve(curve), baseline_query(bundle, query))

    try:
        opt_est = min_proofset_grid(curve, query).value
    except OracleCapExceeded as e:
        LOGGER.info(f"{cell}: {e}")
        opt_est = None

    ratio = adaptive_ratio(result.samples_used, opt_est, cell.epsilon) if opt_est else None
    millis = int(round((time.perf_counter() - start) * 1000)) if timing else 0
    LOGGER.info(f"Bench cell {cell.family} k={cell.k} epsilon={cell.epsilon} seed={cell.seed}: "
                f"{result.samples_used} samples, OPT estimate {opt_est}")
    return BenchRecord(cell.family, cell.k, cell.epsilon, cell.seed, result.samples_used, baseline.samples_used,
                       opt_est, ratio, millis)


def run_bench(cells: Sequence[BenchCell], jobs: Optional[int] = None, timing: bool = True) -> List[BenchRecord]:
    jobs = BENCH_JOBS if jobs is None else jobs
    if jobs < 1:
        raise InvalidParameterException(f"jobs must be at least 1, got {jobs}")
    if jobs == 1:
        return [run_cell(cell, timing) for cell in cells]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda c: run_cell(c, timing), cells))


def write_csv(fh: IO[str], records: Iterable[BenchRecord]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record.row())


def write_summary(fh: IO[str], records: Sequence[BenchRecord]) -> None:
    """gnuplot friendly summary, one blank-line separated block per family."""
    first = True
    for family, group in itertools.groupby(sorted(records, key=lambda r: (r.family, r.k, r.epsilon, r.seed)),
                                           key=lambda r: r.family):
        if not first:
            fh.write("\n\n")
        first = False
        fh.write(f"# {family}\n# k epsilon samples baseline_samples ratio\n")
        for r in group:
            baseline = NA if r.baseline_samples is None else r.baseline_samples
            ratio = NA if r.ratio is None else f"{r.ratio:.6g}"
            fh.write(f"{r.k} {r.epsilon:.6g} {r.samples} {baseline} {ratio}\n")


def summary_path(csv_path: str) -> str:
    stem = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return stem + ".dat"
