import math

import numpy as np
import pytest

from curve_proximity.helper.curve import CircleArcCurve, CurveSpec, InstrumentedCurve, PiecewiseLinearCurve, \
    RawCurve, normalize, parse_polyline, polyline_curve, read_polyline, verify_lipschitz, write_polyline
from curve_proximity.http_exceptions import InvalidCurveException, InvalidParameterException, \
    MalformedInputException


def test_normalize_segment_with_query_point():
    raw = RawCurve(lambda t: (t, 0.0), domain=(0.0, 2.0), lipschitz_bound=1.0)
    curve, back_map = normalize(raw, query_point=(1.0, 0.0))

    assert curve.domain == (0.0, 1.0)
    assert curve.lipschitz_bound == pytest.approx(1.0)
    assert np.allclose(curve.evaluate(0.25), [-0.25, 0.0])
    assert np.allclose(curve.evaluate(1.0), [0.5, 0.0])

    assert back_map.parameter(0.5) == pytest.approx(1.0)
    assert back_map.distance(0.5) == pytest.approx(1.0)
    assert back_map.point([0.5, 0.0]) == pytest.approx([2.0, 0.0])


def test_normalize_constant_scales_by_lipschitz():
    curve, back_map = CurveSpec("constant", {"point": [3.0, 4.0], "lipschitz": 5.0}).normalize()
    assert np.allclose(curve.evaluate(0.7), [0.6, 0.8])
    assert curve.min_distance() == pytest.approx(1.0)
    assert back_map.distance(curve.min_distance()) == pytest.approx(5.0)


def test_normalize_unit_length_polyline_is_identity():
    curve, back_map = polyline_curve([[0.0, 1.0], [0.6, 1.0], [0.6, 1.4]]).normalize()
    assert back_map.domain_start == 0.0
    assert back_map.domain_scale == 1.0
    assert back_map.distance_scale == pytest.approx(1.0)
    assert np.allclose(curve.evaluate(0.8), [0.6, 1.2])


def test_back_map_round_trip():
    raw = RawCurve(lambda t: (math.cos(t), math.sin(t)), domain=(1.0, 4.0), lipschitz_bound=1.0)
    _, back_map = normalize(raw, query_point=(0.2, -0.1))
    for t in np.linspace(0.0, 1.0, 11):
        assert back_map.normalized_parameter(back_map.parameter(t)) == pytest.approx(t, abs=1e-12)
        assert back_map.normalized_distance(back_map.distance(t)) == pytest.approx(t, abs=1e-12)


@pytest.mark.parametrize("raw", [
    RawCurve(lambda t: (t, 0.0), domain=(0.0, 1.0), lipschitz_bound=0.0),
    RawCurve(lambda t: (t, 0.0), domain=(0.0, 1.0), lipschitz_bound=-1.0),
    RawCurve(lambda t: (t, 0.0), domain=(1.0, 1.0), lipschitz_bound=1.0),
])
def test_normalize_rejects_bad_curves(raw):
    with pytest.raises(InvalidCurveException):
        normalize(raw)


def test_normalize_rejects_dimension_mismatch():
    with pytest.raises(InvalidCurveException):
        polyline_curve([[0.0, 1.0], [1.0, 1.0]]).normalize(query_point=(0.0, 0.0, 0.0))


def test_polyline_unit_segment():
    curve = polyline_curve([[0.0, 1.0], [1.0, 1.0]]).build()
    assert np.allclose(curve.evaluate(0.3), [0.3, 1.0])
    assert np.allclose(curve.evaluate(1.0), [1.0, 1.0])


def test_polyline_collinear_vertices():
    straight = polyline_curve([[0.0, 1.0], [1.0, 1.0]]).build()
    split = polyline_curve([[0.0, 1.0], [0.5, 1.0], [1.0, 1.0]]).build()
    for t in np.linspace(0.0, 1.0, 17):
        assert np.allclose(straight.evaluate(t), split.evaluate(t), atol=1e-12)


def test_polyline_arc_length_parametrization():
    spec = polyline_curve([[0.0, 1.0], [0.5, 0.5], [1.0, 1.0]])
    raw = spec.raw()
    assert raw.lipschitz_bound == pytest.approx(math.sqrt(2))
    assert np.allclose(raw.evaluate(0.5), [0.5, 0.5])

    curve, back_map = spec.normalize()
    assert back_map.point(curve.evaluate(0.5)) == pytest.approx([0.5, 0.5])
    assert back_map.point(curve.evaluate(0.25)) == pytest.approx([0.25, 0.75])


def test_polyline_drops_zero_length_edges():
    curve = polyline_curve([[0.0, 1.0], [0.0, 1.0], [1.0, 1.0]]).build()
    assert len(curve.knots) == 2


@pytest.mark.parametrize("vertices", [
    [[0.0, 1.0]],
    [[0.0, 1.0], [0.0, 1.0]],
])
def test_polyline_errors(vertices):
    with pytest.raises(InvalidCurveException):
        polyline_curve(vertices)


def test_curve_spec_unknown_kind():
    with pytest.raises(InvalidCurveException):
        CurveSpec("spline", {})


@pytest.mark.parametrize("kind, params", [
    ("constant", {}),
    ("circle-arc", {"center": [0.0, 2.0], "radius": "one", "start_angle": 0.0, "end_angle": math.pi}),
    ("polyline", {"vertices": [[0.0, 1.0], [1.0], [2.0, 1.0]]}),
    ("polyline", {"vertices": [[[0.0, 1.0]], [[1.0, 1.0]]]}),
])
def test_curve_spec_bad_params(kind, params):
    with pytest.raises(InvalidCurveException):
        CurveSpec(kind, params).build()


def test_circle_arc_distances():
    spec = CurveSpec("circle-arc", {"center": [0.0, 2.0], "radius": 1.0, "start_angle": 0.0,
                                    "end_angle": math.pi})
    raw = spec.raw()
    assert raw.lipschitz_bound == pytest.approx(math.pi)
    assert raw.min_distance() == pytest.approx(math.sqrt(5))
    assert raw.max_distance() == pytest.approx(3.0)

    curve, back_map = spec.normalize()
    assert isinstance(curve, CircleArcCurve)
    assert back_map.distance(curve.min_distance()) == pytest.approx(math.sqrt(5))
    assert verify_lipschitz(curve).violated is False


def test_instrumented_curve_counts_unique_samples():
    curve = InstrumentedCurve(CurveSpec("constant", {"point": [0.0, 1.0]}).build())
    assert curve.unique_sample_count == 0

    p = curve.evaluate(0.4)
    assert np.allclose(p, [0.0, 1.0])
    assert curve.unique_sample_count == 1

    again = curve.evaluate(0.4)
    assert np.array_equal(p, again)
    assert curve.unique_sample_count == 1

    segment = InstrumentedCurve(polyline_curve([[-0.5, 1.0], [0.5, 1.0]]).build())
    segment.evaluate(0.0)
    segment.evaluate(1.0)
    assert segment.unique_sample_count == 2


def test_instrumented_curve_is_transparent(small_corpus):
    base = small_corpus[0].curve()
    wrapped = InstrumentedCurve(base)
    for t in np.linspace(0.0, 1.0, 33):
        assert np.array_equal(wrapped.evaluate(t), base.evaluate(t))


def test_instrumented_curve_rejects_outside_parameters():
    curve = InstrumentedCurve(polyline_curve([[0.0, 1.0], [1.0, 1.0]]).build())
    with pytest.raises(InvalidParameterException):
        curve.evaluate(1.5)
    with pytest.raises(InvalidParameterException):
        curve.evaluate(-0.1)
    assert curve.unique_sample_count == 0


def test_verify_lipschitz():
    segment = verify_lipschitz(polyline_curve([[0.0, 0.0], [1.0, 0.0]]).build(), trials=500, seed=1)
    assert segment.max_ratio == pytest.approx(1.0, abs=1e-9)
    assert not segment.violated

    constant = verify_lipschitz(CurveSpec("constant", {"point": [0.0, 1.0]}).build(), trials=500)
    assert constant.max_ratio == 0.0
    assert not constant.violated

    # Speed 2 but declared as 1
    mislabeled = PiecewiseLinearCurve([0.0, 1.0], [[0.0, 0.0], [2.0, 0.0]], lipschitz_bound=1.0)
    report = verify_lipschitz(mislabeled, trials=100)
    assert report.violated
    assert report.max_ratio == pytest.approx(2.0)

    with pytest.raises(InvalidParameterException):
        verify_lipschitz(mislabeled, trials=0)


def test_polylines_are_one_lipschitz(small_corpus):
    grid = np.linspace(0.0, 1.0, 101)
    for bundle in small_corpus:
        curve = bundle.curve()
        points = np.array([curve.evaluate(t) for t in grid])
        for i in range(0, len(grid), 7):
            gaps = np.linalg.norm(points - points[i], axis=1)
            assert np.all(gaps <= np.abs(grid - grid[i]) + 1e-12)


def test_parse_polyline():
    vertices = parse_polyline("# comment\n0, 1\n\n0.5, 1  # trailing\n1,1\n")
    assert vertices.tolist() == [[0.0, 1.0], [0.5, 1.0], [1.0, 1.0]]


@pytest.mark.parametrize("text", [
    "0, 1\n",
    "0, 1\n1, 1, 1\n",
    "0, 1\nfoo, 1\n",
    "0, 1\ninf, 1\n",
])
def test_parse_polyline_errors(text):
    with pytest.raises(MalformedInputException):
        parse_polyline(text)


def test_polyline_file(tmp_path):
    path = str(tmp_path / "curve.txt")
    write_polyline(path, [[0.0, 1.0], [0.1, 0.7], [1.0 / 3.0, 2.0]], comments=["three vertices"])
    with open(path) as fh:
        assert fh.readline() == "# three vertices\n"
    assert read_polyline(path).tolist() == [[0.0, 1.0], [0.1, 0.7], [1.0 / 3.0, 2.0]]
