"""
Numeric checkers for the ellipse lemmas that drive the query analysis.

Each checker takes a configuration of samples (parameters, points) plus the
lemma constants, evaluates the extremal distances involved and returns a
verdict: "pass" when the conclusion holds, "fail" when the hypotheses hold and
the conclusion does not, "vacuous" when the hypotheses are not met.

`run_lemma_harness` draws Lipschitz-consistent random configurations whose
hypotheses hold by construction and tallies the verdicts.
"""
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from curve_proximity.helper.curve import Point, as_point
from curve_proximity.helper.ellipse import closest_possible, ellipse_from_points, farthest_possible
from curve_proximity.http_exceptions import InvalidParameterException

LEMMA_TOLERANCE = 1e-9
PROPOSITION_TOLERANCE = 1e-12
CONSISTENCY_TOLERANCE = 1e-12
COUNTEREXAMPLE_SLACK = 1e-9

# Margin of the inverted lemma, and the margin of its naive (false) inversion
INVERTED_MARGIN = 3 / 5
NAIVE_MARGIN = 1.0


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


@dataclass
class LemmaConfiguration:
    params: Sequence[float]
    points: Sequence[Point]
    d: float
    a: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        self.params = tuple(float(x) for x in self.params)
        self.points = tuple(as_point(p) for p in self.points)
        if len(self.params) != len(self.points):
            raise InvalidParameterException("Each parameter needs exactly one point")
        if any(x2 < x1 for x1, x2 in zip(self.params, self.params[1:])):
            raise InvalidParameterException(f"Parameters must be sorted, got {self.params}")
        if len({p.size for p in self.points}) != 1:
            raise InvalidParameterException("All points must have the same dimension")
        for i in range(len(self.params) - 1):
            gap = float(np.linalg.norm(self.points[i + 1] - self.points[i]))
            if gap > self.params[i + 1] - self.params[i] + CONSISTENCY_TOLERANCE:
                raise InvalidParameterException(f"Samples {i} and {i + 1} are not Lipschitz-consistent")

    def norm(self, i: int) -> float:
        return float(np.linalg.norm(self.points[i]))

    def closest(self, i: int, j: int) -> float:
        return closest_possible(ellipse_from_points(self.points[i], self.points[j], self.params[j] - self.params[i]))

    def farthest(self, i: int, j: int) -> float:
        return farthest_possible(ellipse_from_points(self.points[i], self.points[j], self.params[j] - self.params[i]))


@dataclass
class LemmaVerdict:
    verdict: Verdict
    quantities: Dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.verdict == Verdict.FAIL


def _expect(count: int, config: LemmaConfiguration):
    if len(config.params) != count:
        raise InvalidParameterException(f"This check needs {count} samples, got {len(config.params)}")


def _conclude(holds: bool, quantities: Dict[str, float]) -> LemmaVerdict:
    return LemmaVerdict(Verdict.PASS if holds else Verdict.FAIL, quantities)


def check_ellipse_lemma(config: LemmaConfiguration) -> LemmaVerdict:
    """Nearest bounds at most d on [x1,x2] and [x3,x4] with |P2| >= d + a give a bound at most d - a on [x1,x4]."""
    _expect(4, config)
    d, a = config.d, config.a
    q = {"closest_12": config.closest(0, 1), "closest_34": config.closest(2, 3), "norm_2": config.norm(1)}
    if not (0 < a < d and q["closest_12"] <= d and q["closest_34"] <= d and q["norm_2"] >= d + a):
        return LemmaVerdict(Verdict.VACUOUS, q)

    q["closest_14"] = config.closest(0, 3)
    return _conclude(q["closest_14"] <= d - a + LEMMA_TOLERANCE, q)


def check_ellipse_corollary_one(config: LemmaConfiguration) -> LemmaVerdict:
    """Samples x1 <= x <= x2: splitting a gap whose bound is at least d - eps at a sample of norm >= d."""
    _expect(3, config)
    d, eps = config.d, config.epsilon
    q = {"closest_12": config.closest(0, 2), "norm_x": config.norm(1)}
    if not (0 < eps < d and q["closest_12"] >= d - eps and q["norm_x"] >= d):
        return LemmaVerdict(Verdict.VACUOUS, q)

    q["closest_1x"] = config.closest(0, 1)
    q["closest_x2"] = config.closest(1, 2)
    threshold = d - eps / 2 - LEMMA_TOLERANCE
    return _conclude(q["closest_1x"] >= threshold or q["closest_x2"] >= threshold, q)


def check_ellipse_corollary_two(config: LemmaConfiguration) -> LemmaVerdict:
    _expect(4, config)
    d, eps = config.d, config.epsilon
    q = {"closest_12": config.closest(0, 1), "closest_34": config.closest(2, 3), "norm_2": config.norm(1)}
    if not (0 < eps / 2 < d and q["closest_12"] <= d and q["closest_34"] <= d and q["norm_2"] > d + eps / 2):
        return LemmaVerdict(Verdict.VACUOUS, q)

    q["closest_14"] = config.closest(0, 3)
    return _conclude(q["closest_14"] < d - eps / 2 + LEMMA_TOLERANCE, q)


def check_ellipse_corollary_three(config: LemmaConfiguration) -> LemmaVerdict:
    _expect(3, config)
    d, eps = config.d, config.epsilon
    q = {"closest_12": config.closest(0, 2), "norm_x": config.norm(1)}
    if not (0 < eps / 2 < d and q["closest_12"] >= d - eps / 2 and q["norm_x"] > d + eps / 2):
        return LemmaVerdict(Verdict.VACUOUS, q)

    q["closest_1x"] = config.closest(0, 1)
    q["closest_x2"] = config.closest(1, 2)
    return _conclude(q["closest_1x"] > d - LEMMA_TOLERANCE or q["closest_x2"] > d - LEMMA_TOLERANCE, q)


def check_inverted_ellipse_lemma(config: LemmaConfiguration, margin: float = INVERTED_MARGIN) -> LemmaVerdict:
    """
    Far bounds at least d on [x1,x2] and [x3,x4] with every |Pi| <= d - a give
    a far bound at least d + margin * a on [x1,x4].

    The lemma holds with margin 3/5; with margin 1 (the naive inversion) it
    does not.
    """
    _expect(4, config)
    d, a = config.d, config.a
    q = {"farthest_12": config.farthest(0, 1), "farthest_34": config.farthest(2, 3),
         "max_norm": max(config.norm(i) for i in range(4))}
    if not (0 < a < d and q["farthest_12"] >= d and q["farthest_34"] >= d and q["max_norm"] <= d - a):
        return LemmaVerdict(Verdict.VACUOUS, q)

    q["farthest_14"] = config.farthest(0, 3)
    return _conclude(q["farthest_14"] >= d + margin * a - LEMMA_TOLERANCE, q)


def check_naive_inverted_ellipse_lemma(config: LemmaConfiguration) -> LemmaVerdict:
    return check_inverted_ellipse_lemma(config, margin=NAIVE_MARGIN)


def farellipse_residual(a: float, c: float) -> float:
    """4|A-Q|^2 - |A-P|^2 written as a quadratic in the cosine c of the half angle."""
    return 4 * (c - 1) ** 2 + 36 * a * a / 25 + (8 * a / 5) * (c - 1) * (4 * c - 1)


def farellipse_minimizing_cosine(a: float) -> float:
    return (5 + 5 * a) / (5 + 8 * a)


def check_farellipse_proposition(a: float, angle: float) -> LemmaVerdict:
    """
    A and B on the unit circle with angle AOB = `angle`, Q on the bisector at
    radius 1 + a, P on ray OB at radius 1 + 8a/5: |A-Q| + |Q-B| >= |A-P|.
    """
    if a <= 0:
        raise InvalidParameterException(f"The proposition needs a > 0, got {a}")

    half = angle / 2
    point_a = np.array([math.cos(half), -math.sin(half)])
    point_b = np.array([math.cos(half), math.sin(half)])
    point_q = np.array([1 + a, 0.0])
    point_p = (1 + 8 * a / 5) * point_b

    lhs = float(np.linalg.norm(point_a - point_q) + np.linalg.norm(point_q - point_b))
    rhs = float(np.linalg.norm(point_a - point_p))
    q = {"lhs": lhs, "rhs": rhs, "residual": farellipse_residual(a, math.cos(half))}
    return _conclude(lhs >= rhs - PROPOSITION_TOLERANCE, q)


def naive_inversion_counterexample(theta: float, a: float) -> LemmaConfiguration:
    """
    Four samples on the unit circle (A, B, B, A' with A' the mirror of A) for
    which both gap ellipses reach exactly d = 1 + a at the bisector points
    while the merged ellipse stays short of d + a for small angles.

    Samples sit just inside the unit circle and the gaps are a hair longer
    than needed so both hypotheses hold strictly.
    """
    radius = 1 - COUNTEREXAMPLE_SLACK
    point_a = radius * np.array([math.sin(theta), math.cos(theta)])
    point_b = radius * np.array([0.0, 1.0])
    mirror = radius * np.array([-math.sin(theta), math.cos(theta)])
    point_q = (1 + a) * np.array([math.sin(theta / 2), math.cos(theta / 2)])
    s = 2 * float(np.linalg.norm(point_a - point_q)) + COUNTEREXAMPLE_SLACK
    return LemmaConfiguration(params=(0.0, s, s, 2 * s), points=(point_a, point_b, point_b, mirror),
                              d=1 + a, a=a)


#####################################
# Random configurations

def random_configuration(rng: np.random.Generator, count: int, dimension: int = 2) -> Tuple[List[float], List[Point]]:
    """Sorted parameters in [0, 1] and a random walk whose steps never exceed the parameter gaps."""
    params = np.sort(rng.uniform(0.0, 1.0, size=count)).tolist()
    direction = rng.normal(size=dimension)
    direction /= np.linalg.norm(direction)
    points = [direction * rng.uniform(0.2, 1.5)]
    for x1, x2 in zip(params, params[1:]):
        step = rng.normal(size=dimension)
        step /= np.linalg.norm(step)
        points.append(points[-1] + step * (x2 - x1) * rng.uniform(0.0, 1.0))
    return params, points


def _sample_ellipse_lemma(rng, dimension):
    params, points = random_configuration(rng, 4, dimension)
    base = LemmaConfiguration(params, points, d=1.0)
    d = max(base.closest(0, 1), base.closest(2, 3)) + rng.uniform(0.0, 0.05)
    room = min(base.norm(1) - d, d)
    if room <= 0:
        return None
    return LemmaConfiguration(params, points, d=d, a=rng.uniform(0.0, room))


def _sample_corollary_one(rng, dimension):
    params, points = random_configuration(rng, 3, dimension)
    base = LemmaConfiguration(params, points, d=1.0)
    d = base.norm(1) * rng.uniform(0.5, 1.0)
    low = max(d - base.closest(0, 2), 0.0)
    if low >= d:
        return None
    return LemmaConfiguration(params, points, d=d, epsilon=rng.uniform(low, d))


def _sample_corollary_two(rng, dimension):
    params, points = random_configuration(rng, 4, dimension)
    base = LemmaConfiguration(params, points, d=1.0)
    d = max(base.closest(0, 1), base.closest(2, 3)) + rng.uniform(0.0, 0.05)
    room = min(2 * (base.norm(1) - d), 2 * d)
    if room <= 0:
        return None
    return LemmaConfiguration(params, points, d=d, epsilon=rng.uniform(0.0, room))


def _sample_corollary_three(rng, dimension):
    params, points = random_configuration(rng, 3, dimension)
    base = LemmaConfiguration(params, points, d=1.0)
    eps = rng.uniform(0.0, 0.5)
    d = min(base.norm(1) - eps / 2, base.closest(0, 2) + eps / 2) * rng.uniform(0.9, 1.0)
    if d <= eps / 2:
        return None
    return LemmaConfiguration(params, points, d=d, epsilon=eps)


def _sample_inverted_lemma(rng, dimension):
    params, points = random_configuration(rng, 4, dimension)
    base = LemmaConfiguration(params, points, d=1.0)
    max_norm = max(base.norm(i) for i in range(4))
    reach = min(base.farthest(0, 1), base.farthest(2, 3))
    if reach <= max_norm:
        return None
    d = rng.uniform(max_norm, reach)
    return LemmaConfiguration(params, points, d=d, a=rng.uniform(0.0, d - max_norm))


LEMMA_CHECKS: Dict[str, Tuple[Callable, Callable]] = {
    "ellipse": (_sample_ellipse_lemma, check_ellipse_lemma),
    "corollary-1": (_sample_corollary_one, check_ellipse_corollary_one),
    "corollary-2": (_sample_corollary_two, check_ellipse_corollary_two),
    "corollary-3": (_sample_corollary_three, check_ellipse_corollary_three),
    "inverted": (_sample_inverted_lemma, check_inverted_ellipse_lemma),
    "naive-inverted": (_sample_inverted_lemma, check_naive_inverted_ellipse_lemma),
}


@dataclass
class HarnessReport:
    name: str
    trials: int
    passed: int = 0
    failed: int = 0
    vacuous: int = 0
    failures: List[Tuple[LemmaConfiguration, LemmaVerdict]] = field(default_factory=list)


def run_lemma_harness(name: str, trials: int, seed: int = 0, dimension: int = 2,
                      max_failures: Optional[int] = 10) -> HarnessReport:
    if name not in LEMMA_CHECKS:
        raise InvalidParameterException(f"Unknown lemma '{name}'. Valid names are: {list(LEMMA_CHECKS)}")

    sampler, check = LEMMA_CHECKS[name]
    rng = np.random.default_rng(seed)
    report = HarnessReport(name=name, trials=trials)
    for _ in range(trials):
        config = sampler(rng, dimension)
        if config is None:
            report.vacuous += 1
            continue

        verdict = check(config)
        if verdict.verdict == Verdict.PASS:
            report.passed += 1
        elif verdict.verdict == Verdict.VACUOUS:
            report.vacuous += 1
        else:
            report.failed += 1
            if max_failures is None or len(report.failures) < max_failures:
                report.failures.append((config, verdict))
    return report


def find_naive_inversion_violation(trials: int, seed: int = 0) -> Optional[LemmaConfiguration]:
    """Random search over the symmetric four-sample family for a failure of the margin-1 inversion."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        config = naive_inversion_counterexample(rng.uniform(0.0, math.radians(30)), rng.uniform(0.01, 0.3))
        if config.params[-1] > 1.0:
            continue
        if check_naive_inverted_ellipse_lemma(config).failed:
            return config
    return None
