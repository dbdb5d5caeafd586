import io
import math

import numpy as np
import pytest

from curve_proximity.helper.bench import CSV_HEADER, BenchCell, adaptive_ratio, baseline_query, bench_cells, \
    cell_instance, run_bench, run_cell, summary_path, write_csv, write_summary
from curve_proximity.helper.curve import InstrumentedCurve
from curve_proximity.helper.instances import spike_family
from curve_proximity.helper.solver import ErrorMode, Query, QueryKind, solve
from curve_proximity.http_exceptions import InvalidParameterException

SPIKE_KS = [2, 4, 8, 16]
SPIKE_EPSILONS = [1 / 24, 1 / 96, 1 / 384]


def test_adaptive_ratio():
    assert adaptive_ratio(14, 14, 1 / 28) == pytest.approx(0.5)
    assert adaptive_ratio(8, 2, 0.5) == pytest.approx(4 / math.log2(3))


def test_spike_family_samples_track_opt():
    """Samples stay within a constant of OPT log(1 / (epsilon OPT)) with OPT = 3k + 2."""
    worst, inverse_eps = [], []
    for eps in SPIKE_EPSILONS:
        n = round(1 / (3 * eps))
        for k in SPIKE_KS:
            if k > n:
                continue
            ratios = []
            for seed in range(8):
                bundle = spike_family(k, eps, seed=seed)
                result = solve(InstrumentedCurve(bundle.curve()), Query(QueryKind.NEAREST, ErrorMode.ABSOLUTE, eps))
                assert result.distance <= bundle.d_min + eps + 1e-9
                ratios.append(adaptive_ratio(result.samples_used, bundle.opt_upper_bound, eps))
            # Worst placement of the down spike in this cell
            worst.append(max(ratios))
            inverse_eps.append(1 / eps)

    assert max(worst) <= 32
    assert max(worst) <= 1.5 * min(worst)
    slope = np.polyfit(np.log2(inverse_eps), np.log2(worst), 1)[0]
    assert slope <= 0.5


#####################################
# Cells

def test_bench_cells():
    cells = bench_cells(["spike", "constant"], [0.05, 0.1], [2, 4], [0, 1])
    assert len(cells) == 8 + 4
    assert cells[0] == BenchCell("spike", 2, 0.05, 0)
    assert all(c.k == 1 for c in cells if c.family == "constant")


@pytest.mark.parametrize("args", [
    (["spline"], [0.1], [1], [0]),
    (["spike"], [], [1], [0]),
    ([], [0.1], [1], [0]),
])
def test_bench_cells_errors(args):
    with pytest.raises(InvalidParameterException):
        bench_cells(*args)


def test_cell_instances():
    bundle, query = cell_instance(BenchCell("hidden-spike", 1, 0.05, 7))
    assert bundle.params["slot"] == 3
    assert query == Query("nearest", "absolute", 0.05)

    bundle, query = cell_instance(BenchCell("rel-segments", 2, 0.1, 0))
    assert query.error_mode == ErrorMode.RELATIVE
    equivalent = baseline_query(bundle, query)
    assert equivalent.absolute
    assert equivalent.epsilon == pytest.approx(min(0.1 * bundle.d_min / 1.1, 0.49))

    with pytest.raises(InvalidParameterException):
        cell_instance(BenchCell("constant", 1, 0.5, 0))


def test_run_cell():
    record = run_cell(BenchCell("segment", 1, 0.1, 0), timing=False)
    assert record.samples == 3
    assert record.baseline_samples == 6
    assert record.opt_est == 3
    assert record.ratio == pytest.approx(adaptive_ratio(3, 3, 0.1))
    assert record.millis == 0
    assert record.row() == ["segment", "1", "0.1", "0", "3", "6", "3", f"{record.ratio:.6g}", "0"]


def test_run_cell_past_the_oracle_cap():
    record = run_cell(BenchCell("spike", 2, 1 / 384, 0), timing=False)
    assert record.opt_est is None
    assert record.ratio is None
    assert record.baseline_samples == 193
    assert record.row()[6:8] == ["NA", "NA"]


def test_run_bench_is_deterministic():
    cells = bench_cells(["constant", "segment", "random"], [0.1, 0.05], [1], [0, 1])
    serial = run_bench(cells, jobs=1, timing=False)
    threaded = run_bench(cells, jobs=3, timing=False)
    assert serial == threaded
    assert [(r.family, r.epsilon, r.seed) for r in serial] == [(c.family, c.epsilon, c.seed) for c in cells]

    with pytest.raises(InvalidParameterException):
        run_bench(cells, jobs=0)


#####################################
# Output

def test_write_csv_and_summary():
    records = run_bench(bench_cells(["constant", "segment"], [0.1], [1], [0]), timing=False)

    out = io.StringIO()
    write_csv(out, records)
    lines = out.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3
    assert lines[1].startswith("constant,1,0.1,0,")

    summary = io.StringIO()
    write_summary(summary, records)
    blocks = summary.getvalue().split("\n\n\n")
    assert len(blocks) == 2
    assert blocks[0].startswith("# constant\n# k epsilon samples baseline_samples ratio\n")


def test_summary_path():
    assert summary_path("out/bench.csv") == "out/bench.dat"
    assert summary_path("bench") == "bench.dat"
