"""
Proof sets: sampled parameter sets whose gap ellipses certify an answer.

A set of samples x1 = 0 < ... < xn = 1 certifies a nearest query when no gap
ellipse can hold a point meaningfully closer to the origin than the best
sample (and symmetrically for farthest queries). The smallest such set is
the instance's optimal sample count; `min_proofset_grid` estimates it from
above by restricting samples to a grid.
"""
import math
import re

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from curve_proximity.config import LOGGER, ORACLE_GRID_DIVISOR, ORACLE_MAX_GRID, PROOFSET_MARGIN_SLACK
from curve_proximity.helper.curve import Curve, InstrumentedCurve, Point, verify_lipschitz
from curve_proximity.helper.ellipse import closest_point, ellipse_from_points, farthest_point
from curve_proximity.helper.solver import ErrorMode, Query, QueryKind, SolveResult
from curve_proximity.http_exceptions import InvalidParameterException, MalformedInputException, \
    OracleCapExceeded

GRID_TOLERANCE = 1e-12
SAMPLE_MATCH_TOLERANCE = 1e-9
HEADER_RE = re.compile(r"^#\s*(nearest|farthest)\s+(absolute|relative)\s+epsilon=(\S+)\s*$")


@dataclass
class ProofSet:
    params: Sequence[float]
    points: Sequence[Point]
    query: Query

    def __post_init__(self):
        try:
            self.params = np.array(self.params, dtype=float)
            self.points = np.array(self.points, dtype=float)
        except (TypeError, ValueError) as e:
            raise MalformedInputException(f"Proof set parameters and points must be numeric and rectangular: {e}")
        if self.points.ndim == 1:
            self.points = self.points.reshape(-1, 1)

        if self.params.ndim != 1 or self.points.ndim != 2:
            raise MalformedInputException("Proof set parameters must be a list of numbers and points a list of "
                                          "coordinate lists")
        if not (np.all(np.isfinite(self.params)) and np.all(np.isfinite(self.points))):
            raise MalformedInputException("Proof set values must be finite")
        if len(self.params) < 2:
            raise MalformedInputException("A proof set needs at least the two endpoints")
        if len(self.points) != len(self.params):
            raise MalformedInputException("A proof set needs exactly one point per parameter")
        if not np.all(np.diff(self.params) > 0):
            raise MalformedInputException("Proof set parameters must be strictly increasing")
        if self.params[0] != 0.0 or self.params[-1] != 1.0:
            raise MalformedInputException("Proof set must contain both endpoints 0 and 1")

    @classmethod
    def from_curve(cls, curve, params: Sequence[float], query: Query) -> 'ProofSet':
        params = sorted(float(t) for t in params)
        return cls(params, [curve.evaluate(t) for t in params], query)

    @classmethod
    def from_result(cls, result: SolveResult) -> 'ProofSet':
        samples = result.samples()
        params = sorted(samples)
        return cls(params, [samples[t] for t in params], result.query)

    def check_on_curve(self, curve, tolerance: float = SAMPLE_MATCH_TOLERANCE) -> None:
        """Raise MalformedInputException unless every sample is the curve point at its parameter."""
        for i, (t, point) in enumerate(zip(self.params, self.points)):
            expected = curve.evaluate(float(t))
            if expected.size != point.size:
                raise MalformedInputException(f"Sample {i} has {point.size} coordinates, the curve has "
                                              f"{expected.size}")
            if float(np.linalg.norm(expected - point)) > tolerance:
                raise MalformedInputException(f"Sample {i} at t={t:.17g} does not lie on the curve")

    def without(self, index: int) -> 'ProofSet':
        keep = np.arange(len(self.params)) != index
        return ProofSet(self.params[keep], self.points[keep], self.query)

    def __len__(self):
        return len(self.params)


@dataclass
class ProofSetVerdict:
    passed: bool
    margin: float
    incumbent: float
    bound: float
    incumbent_index: int
    worst_gap: int


def gap_bounds(ps: ProofSet) -> np.ndarray:
    q = ps.query
    return np.array([q.bound(ps.points[i], ps.points[i + 1], ps.params[i], ps.params[i + 1])
                     for i in range(len(ps.params) - 1)])


def _margin(query: Query, incumbent: float, bound: float) -> Tuple[float, bool]:
    eps = query.epsilon
    if query.absolute:
        margin = bound - (incumbent - eps) if query.nearest else (incumbent + eps) - bound
        return margin, True
    if query.nearest:
        return (1 + eps) * bound - incumbent, bound > 0
    return (1 + eps) * incumbent - bound, incumbent > 0


def check(ps: ProofSet) -> ProofSetVerdict:
    """
    Verdict and margin of a proof set. A non-negative margin (up to the
    configured slack) certifies the best sample; relative modes also require
    a positive denominator.
    """
    q = ps.query
    norms = np.linalg.norm(ps.points, axis=1)
    bounds = gap_bounds(ps)

    if q.nearest:
        incumbent_index, worst_gap = int(np.argmin(norms)), int(np.argmin(bounds))
    else:
        incumbent_index, worst_gap = int(np.argmax(norms)), int(np.argmax(bounds))
    incumbent, bound = float(norms[incumbent_index]), float(bounds[worst_gap])

    margin, denominator_ok = _margin(q, incumbent, bound)
    passed = denominator_ok and margin >= -PROOFSET_MARGIN_SLACK
    return ProofSetVerdict(passed, margin, incumbent, bound, incumbent_index, worst_gap)


#####################################
# Grid restricted OPT oracle

@dataclass
class OptEstimate:
    grid_step: float
    value: Optional[int]
    witness: List[float] = field(default_factory=list)


def grid_size(grid_step: float) -> int:
    return math.ceil(1 / grid_step - 1e-9) + 1


class GridGraph:
    """Samples and pairwise gap bounds of a curve on the grid {0, step, 2 step, ..., 1}."""

    def __init__(self, curve, kind: QueryKind, grid_step: float, max_grid: Optional[int] = None):
        max_grid = ORACLE_MAX_GRID if max_grid is None else max_grid
        size = grid_size(grid_step)
        if size > max_grid:
            raise OracleCapExceeded(f"Grid of {size} nodes exceeds the cap of {max_grid} nodes, use a grid step "
                                    f"of at least {1 / (max_grid - 1):.6g}")

        self.kind = QueryKind(kind)
        self.grid_step = grid_step
        self.grid = np.linspace(0.0, 1.0, size)
        self.points = np.array([curve.evaluate(float(g)) for g in self.grid])
        self.norms = np.linalg.norm(self.points, axis=1)

        # Any valid epsilon serves, bounds only depend on the query kind
        bound_query = Query(self.kind, ErrorMode.ABSOLUTE, 0.25)
        self.bounds = np.full((size, size), np.nan)
        for i in range(size - 1):
            for j in range(i + 1, size):
                self.bounds[i, j] = bound_query.bound(self.points[i], self.points[j], self.grid[i], self.grid[j])

    def _edges(self, query: Query, v: float) -> np.ndarray:
        b, eps, tol = self.bounds, query.epsilon, GRID_TOLERANCE
        with np.errstate(invalid='ignore'):
            if query.absolute:
                edges = b >= v - eps - tol if query.nearest else b <= v + eps + tol
            elif query.nearest:
                edges = (b > 0) & ((1 + eps) * b >= v - tol)
            else:
                edges = b <= (1 + eps) * v + tol if v > 0 else np.zeros_like(b, dtype=bool)
        return np.triu(edges, k=1)

    @staticmethod
    def _sweep(edges: np.ndarray, admissible: np.ndarray, forward: bool) -> Tuple[np.ndarray, np.ndarray]:
        """Fewest nodes on an admissible path from node 0 (forward) or to the last node (backward)."""
        size = len(admissible)
        dist = np.full(size, np.inf)
        link = np.full(size, -1)
        order = range(size) if forward else range(size - 1, -1, -1)
        start = 0 if forward else size - 1
        if not admissible[start]:
            return dist, link
        dist[start] = 1

        for j in order:
            if j == start or not admissible[j]:
                continue
            if forward:
                reach = np.where(edges[:j, j], dist[:j], np.inf)
                best = int(np.argmin(reach))
                link_to = best
            else:
                reach = np.where(edges[j, j + 1:], dist[j + 1:], np.inf)
                best = int(np.argmin(reach)) if len(reach) else 0
                link_to = j + 1 + best
            if len(reach) and np.isfinite(reach[best]):
                dist[j] = reach[best] + 1
                link[j] = link_to
        return dist, link

    def minimum_proofset(self, query: Query) -> OptEstimate:
        if query.kind != self.kind:
            raise InvalidParameterException(f"Grid bounds were computed for {self.kind.value} queries")

        best: Optional[Tuple[float, int, np.ndarray, np.ndarray]] = None
        for v in np.unique(self.norms):
            if query.nearest:
                admissible = self.norms >= v - GRID_TOLERANCE
            else:
                admissible = self.norms <= v + GRID_TOLERANCE
            edges = self._edges(query, v) & admissible[:, None] & admissible[None, :]

            forward, pred = self._sweep(edges, admissible, forward=True)
            backward, succ = self._sweep(edges, admissible, forward=False)
            through = forward + backward - 1
            candidates = np.flatnonzero(np.abs(self.norms - v) <= GRID_TOLERANCE)
            g = int(candidates[np.argmin(through[candidates])])
            if np.isfinite(through[g]) and (best is None or through[g] < best[0]):
                best = (through[g], g, pred, succ)

        if best is None:
            return OptEstimate(self.grid_step, None, [])

        value, g, pred, succ = best
        nodes = [g]
        while nodes[0] != 0:
            nodes.insert(0, int(pred[nodes[0]]))
        while nodes[-1] != len(self.grid) - 1:
            nodes.append(int(succ[nodes[-1]]))
        return OptEstimate(self.grid_step, int(value), [float(self.grid[i]) for i in nodes])


def min_proofset_grid(curve, query: Query, grid_step: Optional[float] = None,
                      max_grid: Optional[int] = None) -> OptEstimate:
    """
    Size of the smallest proof set using only grid parameters, an upper bound
    on the optimal sample count of the instance.
    """
    grid_step = query.epsilon / ORACLE_GRID_DIVISOR if grid_step is None else grid_step
    if not grid_step > 0:
        raise InvalidParameterException(f"Grid step must be positive, got {grid_step}")
    if query.absolute and grid_step > query.epsilon / 4 * (1 + 1e-12):
        raise InvalidParameterException(f"Grid step {grid_step} is coarser than epsilon / 4")

    estimate = GridGraph(curve, query.kind, grid_step, max_grid).minimum_proofset(query)
    LOGGER.debug(f"Grid OPT estimate at epsilon={query.epsilon}, step={grid_step}: {estimate.value}")
    return estimate


@dataclass
class DoublingReport:
    epsilon: float
    grid_step: float
    value: Optional[int]
    half_value: Optional[int]

    @property
    def holds(self) -> bool:
        if self.value is None or self.half_value is None:
            return False
        return self.half_value <= 2 * self.value + 2


def opt_doubling_check(curve, epsilon: float, grid_step: Optional[float] = None,
                       max_grid: Optional[int] = None) -> DoublingReport:
    """Compare the grid OPT at epsilon and epsilon / 2 (nearest, absolute) on one shared grid."""
    grid_step = epsilon / ORACLE_GRID_DIVISOR if grid_step is None else grid_step
    if grid_step > epsilon / 8 * (1 + 1e-12):
        raise InvalidParameterException(f"Grid step {grid_step} is coarser than epsilon / 8")

    graph = GridGraph(curve, QueryKind.NEAREST, grid_step, max_grid)
    value = graph.minimum_proofset(Query(QueryKind.NEAREST, ErrorMode.ABSOLUTE, epsilon)).value
    half = graph.minimum_proofset(Query(QueryKind.NEAREST, ErrorMode.ABSOLUTE, epsilon / 2)).value
    return DoublingReport(epsilon, grid_step, value, half)


#####################################
# Counterexamples to failing proof sets

class DetourCurve(Curve):
    """
    The base curve everywhere except on (x1, x2), where it runs at unit speed
    from C(x1) to `via` and then straight on to C(x2).
    """

    def __init__(self, base, x1: float, x2: float, via: Point):
        self.base = base
        self.x1, self.x2 = float(x1), float(x2)
        self.via = np.array(via, dtype=float)
        self.start = np.array(base.evaluate(x1), dtype=float)
        self.end = np.array(base.evaluate(x2), dtype=float)
        self.dimension = self.start.size
        self.domain = (0.0, 1.0)
        self.lipschitz_bound = 1.0

        self.first_leg = float(np.linalg.norm(self.via - self.start))
        self.turn = min(self.x1 + self.first_leg, self.x2)

    def evaluate(self, t: float) -> Point:
        t = self._check_parameter(t)
        if t <= self.x1 or t >= self.x2:
            return np.array(self.base.evaluate(t), dtype=float)
        if t <= self.turn:
            if self.first_leg == 0.0:
                return self.via.copy()
            return self.start + (self.via - self.start) * ((t - self.x1) / self.first_leg)
        return self.end + (self.via - self.end) * ((self.x2 - t) / (self.x2 - self.turn))


@dataclass
class Counterexample:
    curve: DetourCurve
    gap: Tuple[float, float]
    via: Point
    certified: float
    true_bound: float


def construct_detour(ps: ProofSet, curve, verdict: Optional[ProofSetVerdict] = None) -> Counterexample:
    """
    For a failing proof set, build a 1-Lipschitz curve that agrees with
    `curve` at every sample but passes through the extremal point of the
    worst gap ellipse, so the certified answer is wrong on it.
    """
    verdict = check(ps) if verdict is None else verdict
    if verdict.passed:
        raise InvalidParameterException("The proof set certifies its query, there is no counterexample")

    i = verdict.worst_gap
    x1, x2 = float(ps.params[i]), float(ps.params[i + 1])
    e = ellipse_from_points(ps.points[i], ps.points[i + 1], x2 - x1)
    via = closest_point(e) if ps.query.nearest else farthest_point(e)
    base = curve.curve if isinstance(curve, InstrumentedCurve) else curve
    return Counterexample(DetourCurve(base, x1, x2, via), (x1, x2), via, verdict.incumbent,
                          float(np.linalg.norm(via)))


def counterexample_breaks_certificate(cx: Counterexample, ps: ProofSet, trials: int = 2000, seed: int = 0) -> bool:
    """The detour is Lipschitz, matches every sample, and its extremum escapes the certified tolerance."""
    if verify_lipschitz(cx.curve, trials=trials, seed=seed).violated:
        return False
    second_leg = float(np.linalg.norm(cx.curve.end - cx.via))
    if cx.curve.first_leg + second_leg > cx.gap[1] - cx.gap[0] + 1e-9:
        return False
    for t, p in zip(ps.params, ps.points):
        if float(np.linalg.norm(cx.curve.evaluate(float(t)) - p)) > 1e-12:
            return False

    q, d, eps = ps.query, cx.true_bound, ps.query.epsilon
    if q.absolute:
        return d < cx.certified - eps if q.nearest else d > cx.certified + eps
    if q.nearest:
        return d == 0.0 or cx.certified / d > 1 + eps
    return d > (1 + eps) * cx.certified


@dataclass
class MutationReport:
    trials: int
    weakened: int = 0
    broken: int = 0
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.weakened == self.broken


def weaken(ps: ProofSet, rng: np.random.Generator, threshold: float = -1e-6) -> Optional[ProofSet]:
    """Drop interior samples in random order until the margin falls below `threshold`."""
    order = rng.permutation(np.arange(1, len(ps) - 1))
    removed = set()
    for index in order:
        removed.add(int(index))
        keep = [i for i in range(len(ps)) if i not in removed]
        candidate = ProofSet(ps.params[keep], ps.points[keep], ps.query)
        if check(candidate).margin < threshold:
            return candidate
    return None


def mutation_trials(curve, ps: ProofSet, trials: int, seed: int = 0) -> MutationReport:
    rng = np.random.default_rng(seed)
    report = MutationReport(trials=trials)
    for trial in range(trials):
        weakened = weaken(ps, rng)
        if weakened is None:
            report.skipped += 1
            continue
        report.weakened += 1
        if counterexample_breaks_certificate(construct_detour(weakened, curve), weakened, seed=trial):
            report.broken += 1
    return report


#####################################
# Text format

def format_proofset(ps: ProofSet) -> str:
    q = ps.query
    lines = [f"# {q.kind.value} {q.error_mode.value} epsilon={q.epsilon!r}"]
    for t, p in zip(ps.params, ps.points):
        lines.append(", ".join(repr(float(c)) for c in [t, *p]))
    return "\n".join(lines) + "\n"


def write_proofset(path: str, ps: ProofSet) -> None:
    with open(path, 'w') as fh:
        fh.write(format_proofset(ps))


def parse_proofset(text: str, query: Optional[Query] = None, curve=None, source: str = "<string>") -> ProofSet:
    """
    Lines are `t, c1, c2, ...`. With a curve, lines may give the parameter
    alone and the point is evaluated; given points must then match the curve.
    """
    header: Optional[Query] = None
    params, points = [], []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        match = HEADER_RE.match(stripped)
        if match:
            try:
                header = Query(match.group(1), match.group(2), float(match.group(3)))
            except (ValueError, InvalidParameterException) as e:
                raise MalformedInputException(f"{source}:{line_no}: invalid header ({e})")
            continue

        stripped = stripped.split('#', 1)[0].strip()
        if not stripped:
            continue
        try:
            values = [float(c) for c in stripped.split(',')]
        except ValueError:
            raise MalformedInputException(f"{source}:{line_no}: could not parse '{stripped}'")

        if len(values) == 1:
            if curve is None:
                raise MalformedInputException(f"{source}:{line_no}: expected a parameter and coordinates")
            if not 0.0 <= values[0] <= 1.0:
                raise MalformedInputException(f"{source}:{line_no}: parameter {values[0]} is outside of [0, 1]")
            values.extend(curve.evaluate(values[0]).tolist())
        elif curve is not None and 0.0 <= values[0] <= 1.0:
            if float(np.linalg.norm(curve.evaluate(values[0]) - np.array(values[1:]))) > SAMPLE_MATCH_TOLERANCE:
                raise MalformedInputException(f"{source}:{line_no}: sample does not lie on the curve")
        params.append(values[0])
        points.append(values[1:])

    query = query or header
    if query is None:
        raise MalformedInputException(f"{source}: no query header and no query given")
    if len({len(p) for p in points}) > 1:
        raise MalformedInputException(f"{source}: all samples must have the same dimension")
    return ProofSet(params, points, query)


def read_proofset(path: str, query: Optional[Query] = None, curve=None) -> ProofSet:
    with open(path) as fh:
        return parse_proofset(fh.read(), query=query, curve=curve, source=path)
