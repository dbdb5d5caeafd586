"""
Focal ellipses bounding unexplored curve arcs.

Between two samples C(x1) and C(x2) a 1-Lipschitz curve stays inside the
filled ellipse {p : |C(x1) - p| + |C(x2) - p| <= x2 - x1}. The distances from
the origin to the nearest and farthest point of that region are the bounds the
query algorithms work with.

Extremal distances are computed in the canonical frame of the ellipse (center
at the midpoint of the foci, major axis along the focal direction) by
bracketed root finding on the foot-point equation

    F(t) = (a * y0 / (t + a^2))^2 + (b * y1 / (t + b^2))^2 - 1

where (y0, y1) are the absolute canonical coordinates of the origin. The
nearest point uses the root with t >= 0, the farthest point the root with
t < -a^2.
"""
import math

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from scipy import optimize

from curve_proximity.config import LOGGER
from curve_proximity.helper.curve import Point, as_point
from curve_proximity.http_exceptions import InvalidEllipseException, InvalidParameterException

CONTAINMENT_TOLERANCE = 1e-12
VALIDITY_TOLERANCE = 1e-12
DEGENERACY_RATIO = 1e-14
AXIS_RATIO = 1e-12
ROOT_XTOL = 1e-30
MAX_ITERATIONS = 200


@dataclass(frozen=True, eq=False)
class FocalEllipse:
    f1: Point
    f2: Point
    string_length: float

    def __post_init__(self):
        f1, f2 = as_point(self.f1), as_point(self.f2)
        if f1.size != f2.size:
            raise InvalidEllipseException(f"Foci dimensions differ: {f1.size} and {f2.size}")
        focal = float(np.linalg.norm(f1 - f2))
        if not self.string_length >= focal - VALIDITY_TOLERANCE:
            raise InvalidEllipseException(f"String length {self.string_length} is shorter than the "
                                          f"focal distance {focal}")
        object.__setattr__(self, 'f1', f1)
        object.__setattr__(self, 'f2', f2)
        object.__setattr__(self, 'string_length', max(float(self.string_length), 0.0))

    @property
    def center(self) -> Point:
        return (self.f1 + self.f2) / 2

    @property
    def semi_major(self) -> float:
        return self.string_length / 2

    @property
    def focal_half_distance(self) -> float:
        return float(np.linalg.norm(self.f2 - self.f1)) / 2

    @property
    def semi_minor(self) -> float:
        a, c = self.semi_major, self.focal_half_distance
        return math.sqrt(max(a * a - c * c, 0.0))


@dataclass(frozen=True)
class ExtremalDistances:
    min_dist: float
    max_dist: float


def ellipse_from_points(p1, p2, string_length: float) -> FocalEllipse:
    return FocalEllipse(p1, p2, string_length)


def ellipse_from_samples(curve, x1: float, x2: float) -> FocalEllipse:
    if x1 > x2:
        raise InvalidParameterException(f"Ellipse needs x1 <= x2, got x1={x1} and x2={x2}")
    return FocalEllipse(curve.evaluate(x1), curve.evaluate(x2), x2 - x1)


def contains(e: FocalEllipse, p) -> bool:
    p = as_point(p, e.f1.size)
    return float(np.linalg.norm(e.f1 - p) + np.linalg.norm(e.f2 - p)) <= e.string_length + CONTAINMENT_TOLERANCE


def _bracketed_root(func: Callable[[float], float], lo: float, hi: float, extend_low: bool) -> float:
    f_lo, f_hi = func(lo), func(hi)
    for _ in range(64):
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if (f_lo < 0.0) != (f_hi < 0.0):
            break
        # Rounding pushed the analytic bracket end to the wrong side
        span = hi - lo
        if extend_low:
            lo -= span
            f_lo = func(lo)
        else:
            hi += span
            f_hi = func(hi)

    sol = optimize.root_scalar(func, bracket=(lo, hi), method='brentq', xtol=ROOT_XTOL, maxiter=MAX_ITERATIONS)
    if not sol.converged:
        LOGGER.debug(f"Foot-point root finding stopped after {sol.iterations} iterations: {sol.flag}")
    return sol.root


def _foot_point_function(a: float, b: float, y0: float, y1: float) -> Callable[[float], float]:
    ay, by, a2, b2 = a * y0, b * y1, a * a, b * b

    def func(t):
        u = ay / (t + a2)
        v = by / (t + b2)
        return u * u + v * v - 1.0
    return func


class _CanonicalFrame:
    """Coordinates of the origin in the frame of a non-degenerate ellipse."""

    def __init__(self, e: FocalEllipse):
        self.center = e.center
        self.a = e.semi_major
        self.b = e.semi_minor
        axis = e.f2 - e.f1
        self.u = axis / float(np.linalg.norm(axis))

        origin = -self.center
        signed_y0 = float(np.dot(origin, self.u))
        perp = origin - signed_y0 * self.u
        self.y0 = abs(signed_y0)
        self.y1 = float(np.linalg.norm(perp))
        self.sign0 = -1.0 if signed_y0 < 0 else 1.0
        self.w = perp / self.y1 if self.y1 > 0 else None

    def point(self, x0: float, x1: float) -> Point:
        p = self.center + (self.sign0 * x0) * self.u
        if self.w is not None:
            p = p + x1 * self.w
        return p

    def distance(self, x0: float, x1: float) -> float:
        return math.hypot(x0 - self.y0, x1 - self.y1)


def _closest(e: FocalEllipse) -> Tuple[float, Point]:
    f1, f2, s = e.f1, e.f2, e.string_length
    n1, n2 = float(np.linalg.norm(f1)), float(np.linalg.norm(f2))
    if n1 + n2 <= s:
        return 0.0, np.zeros(f1.size)

    a, c = e.semi_major, e.focal_half_distance
    if a == 0.0:
        return n1, f1.copy()

    if c <= DEGENERACY_RATIO * a:
        center = e.center
        r = float(np.linalg.norm(center))
        return max(0.0, r - a), center - a * center / r

    if e.semi_minor <= DEGENERACY_RATIO * a:
        axis = f2 - f1
        w = min(1.0, max(0.0, -float(np.dot(f1, axis)) / float(np.dot(axis, axis))))
        p = f1 + w * axis
        return float(np.linalg.norm(p)), p

    frame = _CanonicalFrame(e)
    b, y0, y1 = frame.b, frame.y0, frame.y1
    if y1 <= AXIS_RATIO * a:
        x0, x1 = a, 0.0
    elif y0 <= AXIS_RATIO * a:
        x0, x1 = 0.0, b
    else:
        func = _foot_point_function(a, b, y0, y1)
        if func(0.0) <= 0.0:
            # Origin on the boundary up to rounding
            return 0.0, np.zeros(f1.size)
        t = _bracketed_root(func, 0.0, math.hypot(a * y0, b * y1), extend_low=False)
        x0 = a * a * y0 / (t + a * a)
        x1 = b * b * y1 / (t + b * b)
    return frame.distance(x0, x1), frame.point(x0, x1)


def _farthest(e: FocalEllipse) -> Tuple[float, Point]:
    f1, f2 = e.f1, e.f2
    a, c = e.semi_major, e.focal_half_distance
    if a == 0.0:
        return float(np.linalg.norm(f1)), f1.copy()

    if c <= DEGENERACY_RATIO * a:
        center = e.center
        r = float(np.linalg.norm(center))
        if r == 0.0:
            direction = np.zeros(f1.size)
            direction[0] = 1.0
        else:
            direction = center / r
        return r + a, center + a * direction

    if e.semi_minor <= DEGENERACY_RATIO * a:
        n1, n2 = float(np.linalg.norm(f1)), float(np.linalg.norm(f2))
        return (n1, f1.copy()) if n1 >= n2 else (n2, f2.copy())

    frame = _CanonicalFrame(e)
    b, y0, y1 = frame.b, frame.y0, frame.y1
    if y0 <= AXIS_RATIO * a:
        # Origin on the minor axis: the co-vertex opposite to it, or the pair
        # of symmetric stationary points when they exist
        best = (y1 + b, 0.0, -b)
        x1 = -b * b * y1 / (a * a - b * b)
        if abs(x1) <= b:
            x0 = a * math.sqrt(max(0.0, 1.0 - (x1 / b) ** 2))
            dist = math.hypot(x0, x1 - y1)
            if dist > best[0]:
                best = (dist, x0, x1)
        dist, x0, x1 = best
        return dist, frame.point(x0, x1)

    if y1 <= AXIS_RATIO * a:
        x0, x1 = -a, 0.0
    else:
        func = _foot_point_function(a, b, y0, y1)
        radius = math.hypot(a * y0, b * y1)
        t = _bracketed_root(func, -a * a - radius, -a * a - 0.5 * a * y0, extend_low=True)
        x0 = a * a * y0 / (t + a * a)
        x1 = b * b * y1 / (t + b * b)
    return frame.distance(x0, x1), frame.point(x0, x1)


def closest_possible(e: FocalEllipse) -> float:
    return _closest(e)[0]


def closest_point(e: FocalEllipse) -> Point:
    return _closest(e)[1]


def farthest_possible(e: FocalEllipse) -> float:
    return _farthest(e)[0]


def farthest_point(e: FocalEllipse) -> Point:
    return _farthest(e)[1]


def extremal_distances(e: FocalEllipse) -> ExtremalDistances:
    return ExtremalDistances(min_dist=closest_possible(e), max_dist=farthest_possible(e))
