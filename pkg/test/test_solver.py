import math

import numpy as np
import pytest

from curve_proximity.helper.curve import CurveSpec, InstrumentedCurve, polyline_curve
from curve_proximity.helper.instances import constant_instance, hidden_spike_instance, hidden_spike_slots, \
    segment_instance
from curve_proximity.helper.proofset import ProofSet, check
from curve_proximity.helper.solver import ErrorMode, Query, QueryKind, TraceEvent, read_trace, replay, \
    sample_budget, solve, uniform_baseline, write_trace
from curve_proximity.http_exceptions import InvalidParameterException, SampleBudgetExceeded

EPSILONS = [0.1, 0.02, 0.005]


def nearest(epsilon, mode=ErrorMode.ABSOLUTE):
    return Query(QueryKind.NEAREST, mode, epsilon)


def farthest(epsilon, mode=ErrorMode.ABSOLUTE):
    return Query(QueryKind.FARTHEST, mode, epsilon)


def run(bundle, query):
    return solve(InstrumentedCurve(bundle.curve()), query)


#####################################
# Queries

def test_query_parsing():
    q = Query("nearest", "abs", "0.25")
    assert q.kind == QueryKind.NEAREST
    assert q.error_mode == ErrorMode.ABSOLUTE
    assert q.epsilon == 0.25
    assert q.as_primitives() == {"kind": "nearest", "error_mode": "absolute", "epsilon": 0.25}

    assert Query("farthest", "rel", 2.0).error_mode == ErrorMode.RELATIVE


@pytest.mark.parametrize("kind, mode, epsilon", [
    ("nearest", "absolute", 0.5),
    ("nearest", "absolute", 0.0),
    ("farthest", "absolute", -0.1),
    ("nearest", "relative", 0.0),
    ("closest", "absolute", 0.1),
    ("nearest", "approximate", 0.1),
    ("nearest", "absolute", "small"),
])
def test_query_errors(kind, mode, epsilon):
    with pytest.raises(InvalidParameterException):
        Query(kind, mode, epsilon)


#####################################
# Worked examples

def test_constant_curve_nearest():
    result = run(constant_instance((0.0, 1.0), 0.2), nearest(0.2))
    assert result.samples_used == 5
    assert result.sampled_parameters() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert result.x_star == 1.0
    assert result.distance == pytest.approx(1.0)
    assert result.certified_lower == pytest.approx(0.875)
    assert result.certified_upper == pytest.approx(1.0)
    assert result.terminated


def test_constant_curve_farthest():
    result = run(constant_instance((0.0, 1.0), 0.2), farthest(0.2))
    assert result.samples_used == 5
    assert result.distance == pytest.approx(1.0)
    assert result.certified_upper == pytest.approx(1.125)
    assert result.certified_upper <= result.distance + 0.2


def test_segment_nearest():
    result = run(segment_instance(0.3, 0.2), nearest(0.2))
    assert result.samples_used == 3
    assert result.x_star == 0.5
    assert np.allclose(result.point, [0.0, 0.3])
    assert result.distance == pytest.approx(0.3)


def test_circle_arc_nearest_in_raw_units():
    spec = CurveSpec("circle-arc", {"center": [0.0, 2.0], "radius": 1.0, "start_angle": math.pi,
                                    "end_angle": 2 * math.pi})
    curve, back_map = spec.normalize()
    result = solve(InstrumentedCurve(curve), nearest(0.01))
    out = result.as_primitives(back_map)
    assert out["distance"] == pytest.approx(1.0, abs=0.01 * math.pi + 1e-9)
    assert out["distance"] >= 1.0 - 1e-9
    assert out["x_star"] == pytest.approx(0.5, abs=0.06)


def test_one_dimensional_curve():
    result = solve(InstrumentedCurve(polyline_curve([[0.4], [-0.2], [0.3]]).build()), nearest(0.01))
    assert result.distance <= 0.01 + 1e-9


#####################################
# Correctness over the clearance corpus

@pytest.mark.parametrize("epsilon", EPSILONS)
def test_nearest_absolute_corpus(corpus, epsilon):
    for bundle in corpus:
        result = run(bundle, nearest(epsilon))
        assert result.distance <= bundle.d_min + epsilon + 1e-9
        assert result.certified_lower <= bundle.d_min + 1e-9
        assert result.samples_used <= 2 / epsilon + 4


@pytest.mark.parametrize("epsilon", EPSILONS)
def test_farthest_absolute_corpus(corpus, epsilon):
    for bundle in corpus:
        result = run(bundle, farthest(epsilon))
        assert result.distance >= bundle.d_max - epsilon - 1e-9
        assert result.certified_upper >= bundle.d_max - 1e-9
        assert result.samples_used <= 2 / epsilon + 4


@pytest.mark.parametrize("epsilon", EPSILONS)
def test_constant_curve_needs_order_one_over_epsilon(epsilon):
    for q in [nearest(epsilon), farthest(epsilon)]:
        result = run(constant_instance((0.0, 1.0), epsilon), q)
        assert result.samples_used >= 1 / (4 * epsilon)
        assert result.samples_used <= 2 / epsilon + 4


@pytest.mark.parametrize("epsilon", [0.5, 0.1])
def test_relative_corpus(small_corpus, epsilon):
    for bundle in small_corpus:
        near = run(bundle, nearest(epsilon, ErrorMode.RELATIVE))
        assert near.distance <= (1 + epsilon) * bundle.d_min * (1 + 1e-9)

        far = run(bundle, farthest(epsilon, ErrorMode.RELATIVE))
        assert far.distance >= bundle.d_max / (1 + epsilon) * (1 - 1e-9)

        # Never more samples than the absolute run with the equivalent tolerance
        absolute = run(bundle, nearest(epsilon * bundle.d_min / (1 + epsilon)))
        assert near.samples_used <= absolute.samples_used


def test_hidden_spike_lower_bound():
    for epsilon in [0.05, 0.0125]:
        worst = 0
        for slot in range(1, hidden_spike_slots(epsilon) + 1):
            bundle = hidden_spike_instance(epsilon, slot)
            result = run(bundle, nearest(epsilon))
            assert result.distance <= bundle.d_min + epsilon + 1e-9
            worst = max(worst, result.samples_used)
        assert worst >= 1 / (8 * epsilon)


#####################################
# Budget and baseline

def test_sample_budget_exceeded():
    bundle = constant_instance((0.0, 1.0), 0.01)
    with pytest.raises(SampleBudgetExceeded) as excinfo:
        solve(InstrumentedCurve(bundle.curve()), nearest(0.01), budget=10)

    partial = excinfo.value.partial
    assert partial is not None
    assert not partial.terminated
    assert partial.samples_used == 10
    assert partial.certified_lower <= partial.distance
    assert partial.trace[-1].event == "terminate"
    assert partial.trace[-1].reason == "budget"


def test_relative_query_through_the_origin_hits_the_budget():
    curve = polyline_curve([[-0.5, 0.0], [0.5, 0.0]]).build()
    with pytest.raises(SampleBudgetExceeded):
        solve(InstrumentedCurve(curve), nearest(0.1, ErrorMode.RELATIVE), budget=200)


def test_default_budget():
    assert sample_budget(0.1) == 10 * 10 + 64
    assert sample_budget(0.3) == 10 * 4 + 64


def test_uniform_baseline():
    result = uniform_baseline(InstrumentedCurve(constant_instance((0.0, 1.0), 0.1).curve()), nearest(0.1))
    assert result.samples_used == 6
    assert result.sampled_parameters() == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert result.certified_lower == pytest.approx(0.9)

    with pytest.raises(InvalidParameterException):
        uniform_baseline(InstrumentedCurve(constant_instance().curve()), nearest(0.1, ErrorMode.RELATIVE))


def test_uniform_baseline_is_correct(small_corpus):
    for bundle in small_corpus:
        result = uniform_baseline(InstrumentedCurve(bundle.curve()), nearest(0.02))
        assert result.distance <= bundle.d_min + 0.02 + 1e-9
        assert result.samples_used == 26


#####################################
# Traces

def test_result_sample_set_is_a_proof_set(small_corpus):
    for bundle in small_corpus:
        for q in [nearest(0.02), farthest(0.02), nearest(0.1, ErrorMode.RELATIVE),
                  farthest(0.1, ErrorMode.RELATIVE)]:
            result = run(bundle, q)
            assert check(ProofSet.from_result(result)).passed
            assert len(result.samples()) == result.samples_used


def test_replay_passes_on_solver_traces(corpus):
    for bundle in corpus[:100]:
        for q in [nearest(0.02), farthest(0.02), nearest(0.1, ErrorMode.RELATIVE)]:
            report = replay(run(bundle, q).trace, q)
            assert report.ok, report.failures


def test_replay_flags_bad_traces():
    q = nearest(0.2)
    trace = run(constant_instance((0.0, 1.0), 0.2), q).trace

    # Splitting with the wrong midpoint
    moved = [TraceEvent(**ev.as_primitives()) for ev in trace]
    index = next(i for i, ev in enumerate(moved) if ev.event == "sample" and ev.t == 0.5)
    moved[index].t = 0.6
    assert {f.check for f in replay(moved, q).failures} >= {"midpoint"}

    # Replayed with a tolerance that forbids the splits it made
    assert "subdivision" in {f.check for f in replay(trace, nearest(0.45)).failures}

    # Missing termination
    report = replay(trace[:-1], q)
    assert not report.ok
    assert report.failures[-1].check == "proofset"


def test_replay_flags_non_monotone_keys():
    trace = [
        TraceEvent.sample(0.0, [0.0, 1.0]),
        TraceEvent.sample(1.0, [0.0, 1.0]),
        TraceEvent("extract", key=0.75, x1=0.0, x2=0.5),
        TraceEvent("extract", key=0.5, x1=0.0, x2=1.0),
        TraceEvent.terminate("certified"),
    ]
    assert "monotone" in {f.check for f in replay(trace, nearest(0.2)).failures}


def test_trace_file_is_deterministic(tmp_path, small_corpus):
    bundle = small_corpus[3]
    first, second = str(tmp_path / "first.jsonl"), str(tmp_path / "second.jsonl")
    write_trace(first, run(bundle, nearest(0.01)).trace)
    write_trace(second, run(bundle, nearest(0.01)).trace)
    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read()

    trace = read_trace(first)
    assert trace[0].event == "sample" and trace[0].t == 0.0
    assert trace[-1].event == "terminate"
    assert replay(trace, nearest(0.01)).ok


def test_result_in_raw_units():
    spec = polyline_curve([[0.0, 2.0], [4.0, 2.0]])
    curve, back_map = spec.normalize(query_point=(2.0, 0.0))
    result = solve(InstrumentedCurve(curve), nearest(0.05))
    out = result.as_primitives(back_map, include_trace=True)
    assert out["x_star"] == pytest.approx(0.5)
    assert out["distance"] == pytest.approx(2.0)
    assert out["point"] == pytest.approx([2.0, 2.0])
    assert out["query"] == {"kind": "nearest", "error_mode": "absolute", "epsilon": 0.05}
    assert out["trace"][0] == {"event": "sample", "t": 0.0, "point": [-0.5, 0.5]}
