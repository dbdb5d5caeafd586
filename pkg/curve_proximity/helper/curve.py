"""
Curves as seen by the query algorithms.

Every query runs on a *normalized* curve: a map from [0, 1] into R^d whose
Lipschitz constant is at most 1 and whose query point sits at the origin.
Raw curves (any domain, any Lipschitz bound, any query point) are brought to
that form by `normalize`, which also returns the back-map converting results
to raw units.
"""
import math

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from curve_proximity.http_exceptions import InvalidCurveException, InvalidParameterException, \
    MalformedInputException

Point = np.ndarray

CURVE_KINDS = ["polyline", "constant", "line-segment", "circle-arc", "adversarial-instance"]
LIPSCHITZ_TOLERANCE = 1e-9


def as_point(coords: Any, dimension: Optional[int] = None) -> Point:
    try:
        point = np.array(coords, dtype=float)
    except (TypeError, ValueError):
        raise InvalidCurveException(f"A point needs numeric coordinates, got {coords!r}")
    if point.ndim == 0:
        point = point.reshape(1)
    if point.ndim != 1 or point.size < 1:
        raise InvalidCurveException(f"A point needs at least one coordinate, got {coords!r}")
    if not np.all(np.isfinite(point)):
        raise InvalidCurveException(f"Point coordinates must be finite, got {coords!r}")
    if dimension is not None and point.size != dimension:
        raise InvalidCurveException(f"Dimension mismatch: expected {dimension} coordinates, got {point.size}")
    return point


def point_segment_distance(point: Point, start: Point, end: Point) -> float:
    direction = end - start
    length_sq = float(np.dot(direction, direction))
    if length_sq == 0.0:
        return float(np.linalg.norm(point - start))
    w = min(1.0, max(0.0, float(np.dot(point - start, direction)) / length_sq))
    return float(np.linalg.norm(start + w * direction - point))


class Curve:
    """
    Parameter to point map on `domain` with a declared Lipschitz bound.

    Subclasses implement `evaluate`. The ones with closed-form geometry also
    implement `min_distance` and `max_distance` (distance to the origin) and a
    specialised `affine_image`.
    """
    domain: Tuple[float, float] = (0.0, 1.0)
    lipschitz_bound: float = 1.0
    dimension: int = 2

    def evaluate(self, t: float) -> Point:
        raise NotImplementedError()

    def __call__(self, t: float) -> Point:
        return self.evaluate(t)

    def _check_parameter(self, t: float) -> float:
        t = float(t)
        lo, hi = self.domain
        if not lo <= t <= hi:
            raise InvalidParameterException(f"Parameter {t!r} is outside of the curve domain [{lo}, {hi}]")
        return t

    def affine_image(self, domain_start: float, domain_scale: float, offset: Point, scale: float) -> 'Curve':
        """Curve on [0, 1] mapping t to (self(domain_start + t * domain_scale) - offset) * scale."""
        def evaluator(t):
            return (self.evaluate(min(domain_start + t * domain_scale, self.domain[1])) - offset) * scale
        return FunctionCurve(evaluator, self.dimension, lipschitz_bound=self.lipschitz_bound * domain_scale * scale)

    def min_distance(self) -> float:
        raise NotImplementedError(f"{self.__class__.__name__} has no closed-form distance")

    def max_distance(self) -> float:
        raise NotImplementedError(f"{self.__class__.__name__} has no closed-form distance")


class FunctionCurve(Curve):
    def __init__(self, evaluator: Callable[[float], Any], dimension: int,
                 domain: Tuple[float, float] = (0.0, 1.0), lipschitz_bound: float = 1.0):
        self.evaluator = evaluator
        self.dimension = dimension
        self.domain = (float(domain[0]), float(domain[1]))
        self.lipschitz_bound = float(lipschitz_bound)

    def evaluate(self, t: float) -> Point:
        return as_point(self.evaluator(self._check_parameter(t)), self.dimension)


class PiecewiseLinearCurve(Curve):
    """Linear interpolation between `points` placed at strictly increasing parameter `knots`."""

    def __init__(self, knots: Sequence[float], points: Sequence[Any], lipschitz_bound: Optional[float] = None):
        self.knots = np.array(knots, dtype=float)
        self.points = np.array(points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points.reshape(-1, 1)

        if self.knots.ndim != 1 or len(self.knots) < 2:
            raise InvalidCurveException("A piecewise-linear curve needs at least two knots")
        if len(self.points) != len(self.knots):
            raise InvalidCurveException("A piecewise-linear curve needs exactly one point per knot")
        if not np.all(np.diff(self.knots) > 0):
            raise InvalidCurveException("Knots of a piecewise-linear curve must be strictly increasing")
        if not np.all(np.isfinite(self.points)) or not np.all(np.isfinite(self.knots)):
            raise InvalidCurveException("Knots and points must be finite")

        self.dimension = self.points.shape[1]
        self.domain = (float(self.knots[0]), float(self.knots[-1]))
        self._knot_list = self.knots.tolist()

        speeds = np.linalg.norm(np.diff(self.points, axis=0), axis=1) / np.diff(self.knots)
        self.speed = float(speeds.max())
        self.lipschitz_bound = self.speed if lipschitz_bound is None else float(lipschitz_bound)

    def evaluate(self, t: float) -> Point:
        t = self._check_parameter(t)
        if t == self._knot_list[-1]:
            return self.points[-1].copy()

        i = int(np.searchsorted(self.knots, t, side='right')) - 1
        t0, t1 = self._knot_list[i], self._knot_list[i + 1]
        w = (t - t0) / (t1 - t0)
        return self.points[i] + w * (self.points[i + 1] - self.points[i])

    def affine_image(self, domain_start: float, domain_scale: float, offset: Point, scale: float) -> Curve:
        knots = (self.knots - domain_start) / domain_scale
        # Pin the end knots so the image domain is exactly [0, 1]
        knots[0], knots[-1] = 0.0, 1.0
        return PiecewiseLinearCurve(knots, (self.points - offset) * scale,
                                    lipschitz_bound=self.lipschitz_bound * domain_scale * scale)

    def segments(self) -> Iterable[Tuple[Point, Point]]:
        return zip(self.points[:-1], self.points[1:])

    def min_distance(self) -> float:
        starts, ends = self.points[:-1], self.points[1:]
        direction = ends - starts
        length_sq = np.einsum('ij,ij->i', direction, direction)
        proj = -np.einsum('ij,ij->i', starts, direction)
        w = np.divide(proj, length_sq, out=np.zeros_like(proj), where=length_sq > 0)
        w = np.clip(w, 0.0, 1.0)
        return float(np.linalg.norm(starts + w[:, None] * direction, axis=1).min())

    def max_distance(self) -> float:
        return float(np.linalg.norm(self.points, axis=1).max())


def _angle_in_arc(angle: float, start: float, end: float) -> bool:
    lo, hi = min(start, end), max(start, end)
    if hi - lo >= 2 * math.pi:
        return True
    return (angle - lo) % (2 * math.pi) <= hi - lo


class CircleArcCurve(Curve):
    """Arc of the circle (center, radius) swept at constant angular speed from start_angle to end_angle."""

    def __init__(self, center: Sequence[float], radius: float, start_angle: float, end_angle: float,
                 domain: Tuple[float, float] = (0.0, 1.0)):
        self.center = as_point(center, 2)
        self.radius = float(radius)
        self.start_angle = float(start_angle)
        self.end_angle = float(end_angle)
        self.domain = (float(domain[0]), float(domain[1]))
        self.dimension = 2

        if self.radius <= 0:
            raise InvalidCurveException("Circle arc radius must be positive")
        if self.start_angle == self.end_angle:
            raise InvalidCurveException("Circle arc must sweep a non-zero angle")
        if self.domain[1] <= self.domain[0]:
            raise InvalidCurveException("Circle arc domain must be non-degenerate")

        self.lipschitz_bound = self.radius * abs(self.end_angle - self.start_angle) / (self.domain[1] - self.domain[0])

    def _angle(self, t: float) -> float:
        lo, hi = self.domain
        return self.start_angle + (t - lo) / (hi - lo) * (self.end_angle - self.start_angle)

    def evaluate(self, t: float) -> Point:
        theta = self._angle(self._check_parameter(t))
        return self.center + self.radius * np.array([math.cos(theta), math.sin(theta)])

    def affine_image(self, domain_start: float, domain_scale: float, offset: Point, scale: float) -> Curve:
        start = self._angle(domain_start)
        end = self._angle(domain_start + domain_scale)
        return CircleArcCurve((self.center - offset) * scale, self.radius * scale, start, end)

    def _endpoint_norms(self) -> List[float]:
        return [float(np.linalg.norm(self.evaluate(self.domain[0]))),
                float(np.linalg.norm(self.evaluate(self.domain[1])))]

    def min_distance(self) -> float:
        c = float(np.linalg.norm(self.center))
        if c == 0.0:
            return self.radius
        toward_origin = math.atan2(-self.center[1], -self.center[0])
        if _angle_in_arc(toward_origin, self.start_angle, self.end_angle):
            return abs(c - self.radius)
        return min(self._endpoint_norms())

    def max_distance(self) -> float:
        c = float(np.linalg.norm(self.center))
        if c == 0.0:
            return self.radius
        away = math.atan2(self.center[1], self.center[0])
        if _angle_in_arc(away, self.start_angle, self.end_angle):
            return c + self.radius
        return max(self._endpoint_norms())


@dataclass
class RawCurve:
    evaluator: Callable[[float], Any]
    domain: Tuple[float, float]
    lipschitz_bound: float
    dimension: int = 2

    def as_curve(self) -> Curve:
        return FunctionCurve(self.evaluator, self.dimension, self.domain, self.lipschitz_bound)


@dataclass(frozen=True)
class BackMap:
    domain_start: float
    domain_scale: float
    distance_scale: float
    query_point: Optional[Tuple[float, ...]] = None

    def parameter(self, t: float) -> float:
        return self.domain_start + t * self.domain_scale

    def distance(self, r: float) -> float:
        return r * self.distance_scale

    def point(self, p: Sequence[float]) -> List[float]:
        raw = np.asarray(p, dtype=float) * self.distance_scale
        if self.query_point is not None:
            raw = raw + np.asarray(self.query_point)
        return raw.tolist()

    def normalized_parameter(self, x: float) -> float:
        return (x - self.domain_start) / self.domain_scale

    def normalized_distance(self, r: float) -> float:
        return r / self.distance_scale


IDENTITY_BACK_MAP = BackMap(0.0, 1.0, 1.0)


def normalize(raw: Union[RawCurve, Curve], query_point: Optional[Sequence[float]] = None) -> Tuple[Curve, BackMap]:
    """
    Bring a raw curve to the canonical form: domain [0, 1], Lipschitz constant
    at most 1, query point at the origin.

    Returns the normalized curve and the back-map to raw units.
    """
    curve = raw.as_curve() if isinstance(raw, RawCurve) else raw
    lo, hi = curve.domain
    lipschitz = curve.lipschitz_bound

    if not lipschitz > 0:
        raise InvalidCurveException(f"Lipschitz bound must be positive, got {lipschitz}")
    if not hi > lo:
        raise InvalidCurveException(f"Curve domain [{lo}, {hi}] is empty")

    origin = np.zeros(curve.dimension) if query_point is None else as_point(query_point)
    if origin.size != curve.dimension:
        raise InvalidCurveException(f"Query point has {origin.size} coordinates but the curve lives "
                                    f"in dimension {curve.dimension}")

    width = hi - lo
    back_map = BackMap(lo, width, lipschitz * width, tuple(origin.tolist()))
    return curve.affine_image(lo, width, origin, 1.0 / back_map.distance_scale), back_map


def _unit_speed_knots(vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    lengths = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    keep = np.concatenate([[True], lengths > 0])
    vertices = vertices[keep]
    lengths = lengths[lengths > 0]
    total = float(lengths.sum())
    if len(vertices) < 2 or total <= 0:
        raise InvalidCurveException("Polyline has zero total length")
    knots = np.concatenate([[0.0], np.cumsum(lengths) / total])
    knots[-1] = 1.0
    return knots, vertices, total


@dataclass
class CurveSpec:
    """Declarative description of a curve, realized in raw units by `raw()`."""
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvalidCurveException(f"Unknown curve kind '{self.kind}'. Valid kinds are: {CURVE_KINDS}")

    def raw(self) -> Curve:
        try:
            return self._realize()
        except KeyError as e:
            raise InvalidCurveException(f"Curve kind '{self.kind}' is missing parameter {e}")
        except (TypeError, ValueError) as e:
            raise InvalidCurveException(f"Invalid parameters for curve kind '{self.kind}': {e}")

    def _realize(self) -> Curve:
        p = self.params
        if self.kind == "polyline":
            vertices = np.array(p["vertices"], dtype=float)
            if vertices.ndim == 1:
                vertices = vertices.reshape(-1, 1)
            if vertices.ndim != 2:
                raise InvalidCurveException("Polyline vertices must be a list of coordinate lists")
            if len(vertices) < 2:
                raise InvalidCurveException("A polyline needs at least 2 vertices")
            if "knots" in p:
                return PiecewiseLinearCurve(p["knots"], vertices, lipschitz_bound=p.get("lipschitz"))
            if "lipschitz" in p:
                # Vertices at evenly spaced parameters with a declared bound
                lo, hi = p.get("domain", (0.0, 1.0))
                if not hi > lo:
                    raise InvalidCurveException(f"Curve domain [{lo}, {hi}] is empty")
                knots = np.linspace(lo, hi, len(vertices))
                return PiecewiseLinearCurve(knots, vertices, lipschitz_bound=p["lipschitz"])
            knots, vertices, total = _unit_speed_knots(vertices)
            return PiecewiseLinearCurve(knots, vertices, lipschitz_bound=total)

        if self.kind == "constant":
            point = as_point(p["point"])
            domain = p.get("domain", (0.0, 1.0))
            return PiecewiseLinearCurve(domain, [point, point], lipschitz_bound=p.get("lipschitz", 1.0))

        if self.kind == "line-segment":
            start, end = as_point(p["start"]), as_point(p["end"])
            return CurveSpec("polyline", {"vertices": [start, end]}).raw()

        if self.kind == "circle-arc":
            return CircleArcCurve(p["center"], p["radius"], p["start_angle"], p["end_angle"])

        # adversarial-instance
        from curve_proximity.helper.instances import realize_adversarial_curve
        return realize_adversarial_curve(p)

    def normalize(self, query_point: Optional[Sequence[float]] = None) -> Tuple[Curve, BackMap]:
        return normalize(self.raw(), query_point)

    def build(self, query_point: Optional[Sequence[float]] = None) -> Curve:
        return self.normalize(query_point)[0]

    def as_primitives(self) -> Dict[str, Any]:
        def _plain(value):
            if isinstance(value, np.ndarray):
                return value.tolist()
            if isinstance(value, (list, tuple)):
                return [_plain(v) for v in value]
            return value
        return {"kind": self.kind, "params": {k: _plain(v) for k, v in self.params.items()}}


def polyline_curve(vertices: Sequence[Sequence[float]]) -> CurveSpec:
    vertices = np.array(vertices, dtype=float)
    if vertices.ndim != 2 or len(vertices) < 2:
        raise InvalidCurveException("A polyline needs at least 2 vertices")
    if float(np.linalg.norm(np.diff(vertices, axis=0), axis=1).sum()) <= 0:
        raise InvalidCurveException("Polyline has zero total length")
    return CurveSpec("polyline", {"vertices": vertices.tolist()})


class InstrumentedCurve:
    """
    Sample-counting wrapper around a normalized curve.

    Points are cached by exact parameter value; `unique_sample_count` is the
    number of distinct parameters evaluated so far.
    """

    def __init__(self, curve: Curve):
        if curve.domain != (0.0, 1.0):
            raise InvalidCurveException("Only normalized curves on [0, 1] can be instrumented")
        self.curve = curve
        self.dimension = curve.dimension
        self.sample_cache: Dict[float, Point] = {}

    @property
    def unique_sample_count(self) -> int:
        return len(self.sample_cache)

    def evaluate(self, t: float) -> Point:
        t = float(t)
        point = self.sample_cache.get(t)
        if point is None:
            if not 0.0 <= t <= 1.0:
                raise InvalidParameterException(f"Parameter {t!r} is outside of [0, 1]")
            point = np.array(self.curve.evaluate(t), dtype=float)
            point.setflags(write=False)
            self.sample_cache[t] = point
        return point

    __call__ = evaluate


def evaluate(curve: InstrumentedCurve, t: float) -> Point:
    return curve.evaluate(t)


@dataclass
class LipschitzReport:
    trials: int
    max_ratio: float
    bound: float
    violated: bool
    worst_pair: Optional[Tuple[float, float]] = None


def verify_lipschitz(curve: Union[Curve, InstrumentedCurve], trials: int = 1000, seed: int = 0) -> LipschitzReport:
    """
    Spot check the declared Lipschitz bound on random parameter pairs.

    Half of the pairs are drawn over the whole domain, the other half are
    close pairs. Advisory only: passing does not prove the condition.
    """
    if trials < 1:
        raise InvalidParameterException("At least one trial is required")

    base = curve.curve if isinstance(curve, InstrumentedCurve) else curve
    lo, hi = base.domain
    width = hi - lo
    rng = np.random.default_rng(seed)

    t1 = rng.uniform(lo, hi, size=trials)
    t2 = rng.uniform(lo, hi, size=trials)
    local = np.arange(trials) % 2 == 1
    t2[local] = np.clip(t1[local] + rng.uniform(-1e-3, 1e-3, size=local.sum()) * width, lo, hi)

    max_ratio, worst = 0.0, None
    for a, b in zip(t1.tolist(), t2.tolist()):
        if a == b:
            continue
        ratio = float(np.linalg.norm(base.evaluate(a) - base.evaluate(b))) / abs(a - b)
        if ratio > max_ratio:
            max_ratio, worst = ratio, (a, b)

    bound = base.lipschitz_bound
    return LipschitzReport(trials=trials, max_ratio=max_ratio, bound=bound,
                           violated=max_ratio > bound * (1 + LIPSCHITZ_TOLERANCE), worst_pair=worst)


def parse_polyline(text: str, source: str = "<string>") -> np.ndarray:
    vertices, dimension = [], None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            coords = [float(c) for c in line.split(',')]
        except ValueError:
            raise MalformedInputException(f"{source}:{line_no}: could not parse coordinates '{line}'")
        if dimension is None:
            dimension = len(coords)
        elif len(coords) != dimension:
            raise MalformedInputException(f"{source}:{line_no}: expected {dimension} coordinates, "
                                          f"got {len(coords)}")
        if not all(math.isfinite(c) for c in coords):
            raise MalformedInputException(f"{source}:{line_no}: coordinates must be finite")
        vertices.append(coords)

    if len(vertices) < 2:
        raise MalformedInputException(f"{source}: a polyline needs at least 2 vertices")
    return np.array(vertices, dtype=float)


def read_polyline(path: str) -> np.ndarray:
    with open(path) as fh:
        return parse_polyline(fh.read(), source=path)


def format_polyline(vertices: Sequence[Sequence[float]], comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.extend(", ".join(repr(float(c)) for c in vertex) for vertex in np.atleast_2d(vertices))
    return "\n".join(lines) + "\n"


def write_polyline(path: str, vertices: Sequence[Sequence[float]], comments: Iterable[str] = ()) -> None:
    with open(path, 'w') as fh:
        fh.write(format_polyline(vertices, comments))
