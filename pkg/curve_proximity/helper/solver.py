"""
Adaptive nearest-point and farthest-point search on normalized curves.

The search keeps a priority queue of parameter intervals keyed by the
extremal distance of their focal ellipse. The most promising interval is
extracted; either its bound certifies the incumbent sample and the search
stops, or the interval is split at its midpoint. Every step is recorded as a
trace event so runs can be replayed and audited.
"""
import heapq
import json
import math

from dataclasses import dataclass, field
from enum import Enum
from itertools import count
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from curve_proximity.config import LOGGER, REPLAY_KEY_TOLERANCE, REPLAY_LENGTH_SLACK, \
    SAMPLE_BUDGET_FACTOR, SAMPLE_BUDGET_OFFSET
from curve_proximity.helper.curve import BackMap, InstrumentedCurve
from curve_proximity.helper.ellipse import closest_possible, ellipse_from_points, farthest_possible
from curve_proximity.http_exceptions import InvalidParameterException, MalformedInputException, \
    SampleBudgetExceeded


class QueryKind(str, Enum):
    NEAREST = "nearest"
    FARTHEST = "farthest"


class ErrorMode(str, Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


ERROR_MODE_ALIASES = {"abs": ErrorMode.ABSOLUTE, "rel": ErrorMode.RELATIVE}


@dataclass(frozen=True)
class Query:
    kind: QueryKind
    error_mode: ErrorMode
    epsilon: float

    def __post_init__(self):
        try:
            kind = QueryKind(self.kind)
            mode = ERROR_MODE_ALIASES.get(self.error_mode) or ErrorMode(self.error_mode)
            epsilon = float(self.epsilon)
        except (TypeError, ValueError) as e:
            raise InvalidParameterException(f"Invalid query: {e}")

        if mode == ErrorMode.ABSOLUTE and not 0 < epsilon < 0.5:
            raise InvalidParameterException(f"Absolute error queries need 0 < epsilon < 1/2, got {epsilon}")
        if mode == ErrorMode.RELATIVE and not epsilon > 0:
            raise InvalidParameterException(f"Relative error queries need epsilon > 0, got {epsilon}")

        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'error_mode', mode)
        object.__setattr__(self, 'epsilon', epsilon)

    @property
    def nearest(self) -> bool:
        return self.kind == QueryKind.NEAREST

    @property
    def absolute(self) -> bool:
        return self.error_mode == ErrorMode.ABSOLUTE

    def bound(self, p1, p2, x1: float, x2: float) -> float:
        e = ellipse_from_points(p1, p2, x2 - x1)
        return closest_possible(e) if self.nearest else farthest_possible(e)

    def improves(self, candidate: float, incumbent: float) -> bool:
        return candidate < incumbent if self.nearest else candidate > incumbent

    def certifies(self, key: float, incumbent: float) -> bool:
        eps = self.epsilon
        if self.absolute:
            return incumbent - eps <= key if self.nearest else key <= incumbent + eps
        if self.nearest:
            return key > 0 and incumbent / key <= 1 + eps
        return incumbent > 0 and key / incumbent <= 1 + eps

    def certified_bounds(self, key: float, incumbent: float) -> Tuple[float, float]:
        if self.nearest:
            return min(key, incumbent), incumbent
        return incumbent, max(key, incumbent)

    def as_primitives(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "error_mode": self.error_mode.value, "epsilon": self.epsilon}


@dataclass(order=True)
class QueueEntry:
    priority: float
    seq: int
    key: float = field(compare=False)
    x1: float = field(compare=False)
    x2: float = field(compare=False)


@dataclass
class Incumbent:
    x_hat: float
    d_hat: float


TRACE_EVENTS = ["sample", "extract", "insert", "terminate"]


@dataclass
class TraceEvent:
    event: str
    t: Optional[float] = None
    point: Optional[List[float]] = None
    key: Optional[float] = None
    x1: Optional[float] = None
    x2: Optional[float] = None
    reason: Optional[str] = None

    @classmethod
    def sample(cls, t: float, point) -> 'TraceEvent':
        return cls("sample", t=t, point=[float(c) for c in point])

    @classmethod
    def extract(cls, entry: QueueEntry) -> 'TraceEvent':
        return cls("extract", key=entry.key, x1=entry.x1, x2=entry.x2)

    @classmethod
    def insert(cls, entry: QueueEntry) -> 'TraceEvent':
        return cls("insert", key=entry.key, x1=entry.x1, x2=entry.x2)

    @classmethod
    def terminate(cls, reason: str) -> 'TraceEvent':
        return cls("terminate", reason=reason)

    def as_primitives(self) -> Dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.as_primitives())

    @classmethod
    def from_primitives(cls, data: Dict[str, Any]) -> 'TraceEvent':
        if data.get("event") not in TRACE_EVENTS:
            raise MalformedInputException(f"Unknown trace event: {data.get('event')!r}")
        return cls(**data)


@dataclass
class SolveResult:
    query: Query
    x_star: float
    point: np.ndarray
    distance: float
    certified_lower: float
    certified_upper: float
    samples_used: int
    trace: List[TraceEvent] = field(default_factory=list)
    terminated: bool = True

    def samples(self) -> Dict[float, List[float]]:
        return {ev.t: ev.point for ev in self.trace if ev.event == "sample"}

    def sampled_parameters(self) -> List[float]:
        return sorted(self.samples())

    def as_primitives(self, back_map: Optional[BackMap] = None, include_trace: bool = False) -> Dict[str, Any]:
        """Result as plain data, in raw units when a back-map is given."""
        to_param = back_map.parameter if back_map else float
        to_dist = back_map.distance if back_map else float
        out = {
            "x_star": to_param(self.x_star),
            "point": [float(c) for c in self.point],
            "distance": to_dist(self.distance),
            "certified_lower": to_dist(self.certified_lower),
            "certified_upper": to_dist(self.certified_upper),
            "samples_used": self.samples_used,
            "terminated": self.terminated,
            "query": self.query.as_primitives(),
        }
        if back_map is not None:
            out["point"] = back_map.point(self.point)
        if include_trace:
            out["trace"] = [ev.as_primitives() for ev in self.trace]
        return out


def sample_budget(epsilon: float) -> int:
    return SAMPLE_BUDGET_FACTOR * math.ceil(1 / epsilon) + SAMPLE_BUDGET_OFFSET


def solve(curve: InstrumentedCurve, query: Query, budget: Optional[int] = None) -> SolveResult:
    """
    Run the adaptive search for `query` on a normalized curve.

    Both endpoints are sampled first; the incumbent starts at parameter 0 only
    when it is strictly better than parameter 1. Queue ties are broken by
    insertion order.

    Raises SampleBudgetExceeded (carrying the partial result) once `budget`
    samples have been taken without certification.
    """
    budget = sample_budget(query.epsilon) if budget is None else budget
    trace: List[TraceEvent] = []
    queue: List[QueueEntry] = []
    seq = count()
    points: Dict[float, Any] = {}
    taken = 0
    sign = 1.0 if query.nearest else -1.0

    LOGGER.debug(f"Solving {query.kind.value}/{query.error_mode.value} query with epsilon={query.epsilon} "
                 f"(budget: {budget} samples)")

    def take_sample(t: float) -> float:
        nonlocal taken
        taken += 1
        p = curve.evaluate(t)
        points[t] = p
        trace.append(TraceEvent.sample(t, p))
        return float(np.linalg.norm(p))

    def push(x1: float, x2: float):
        key = query.bound(points[x1], points[x2], x1, x2)
        entry = QueueEntry(sign * key, next(seq), key, x1, x2)
        heapq.heappush(queue, entry)
        trace.append(TraceEvent.insert(entry))

    def partial(entry: QueueEntry) -> SolveResult:
        keys = [e.key for e in queue] + [entry.key]
        key = min(keys) if query.nearest else max(keys)
        lower, upper = query.certified_bounds(key, incumbent.d_hat)
        return SolveResult(query, incumbent.x_hat, points[incumbent.x_hat], incumbent.d_hat, lower, upper,
                           len(points), trace, terminated=False)

    n0, n1 = take_sample(0.0), take_sample(1.0)
    incumbent = Incumbent(0.0, n0) if query.improves(n0, n1) else Incumbent(1.0, n1)
    push(0.0, 1.0)

    while True:
        entry = heapq.heappop(queue)
        trace.append(TraceEvent.extract(entry))

        if query.certifies(entry.key, incumbent.d_hat):
            trace.append(TraceEvent.terminate("certified"))
            break

        if taken >= budget:
            trace.append(TraceEvent.terminate("budget"))
            LOGGER.debug(f"Sample budget of {budget} exhausted")
            raise SampleBudgetExceeded(f"Sample budget of {budget} samples exceeded without certifying the "
                                       f"result: the extremum may be zero in relative mode or the curve may "
                                       f"violate its Lipschitz bound", partial=partial(entry))

        x = (entry.x1 + entry.x2) / 2
        dist = take_sample(x)
        if query.improves(dist, incumbent.d_hat):
            incumbent = Incumbent(x, dist)
        push(entry.x1, x)
        push(x, entry.x2)

    lower, upper = query.certified_bounds(entry.key, incumbent.d_hat)
    LOGGER.debug(f"Certified {incumbent.d_hat} at x={incumbent.x_hat} using {len(points)} samples")
    return SolveResult(query, incumbent.x_hat, points[incumbent.x_hat], incumbent.d_hat, lower, upper,
                       len(points), trace)


def uniform_baseline(curve: InstrumentedCurve, query: Query) -> SolveResult:
    """Sample every 2 * epsilon (parameter 1 included) and report the best sample."""
    if not query.absolute:
        raise InvalidParameterException("The uniform baseline only supports absolute error queries")

    step = 2 * query.epsilon
    steps = math.ceil(1 / step - 1e-12)
    params = [i * step for i in range(steps)] + [1.0]

    trace: List[TraceEvent] = []
    points = []
    incumbent = None
    for t in params:
        p = curve.evaluate(t)
        points.append(p)
        trace.append(TraceEvent.sample(t, p))
        dist = float(np.linalg.norm(p))
        if incumbent is None or query.improves(dist, incumbent.d_hat):
            incumbent = Incumbent(t, dist)

    keys = []
    for i in range(len(params) - 1):
        key = query.bound(points[i], points[i + 1], params[i], params[i + 1])
        keys.append(key)
        trace.append(TraceEvent("insert", key=key, x1=params[i], x2=params[i + 1]))
    trace.append(TraceEvent.terminate("grid"))

    key = min(keys) if query.nearest else max(keys)
    lower, upper = query.certified_bounds(key, incumbent.d_hat)
    return SolveResult(query, incumbent.x_hat, points[params.index(incumbent.x_hat)], incumbent.d_hat,
                       lower, upper, len(params), trace)


@dataclass
class ReplayFailure:
    check: str
    index: int
    message: str


@dataclass
class ReplayReport:
    events: int
    failures: List[ReplayFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def replay(trace: List[TraceEvent], query: Query) -> ReplayReport:
    """
    Audit a solver trace:
      subdivision: in absolute mode no interval of length 2 * epsilon or less is split
      monotone:    extracted keys never improve on the previous extraction
      midpoint:    every split samples the exact midpoint of the extracted interval
      proofset:    the final sample set certifies the query
    """
    # Imported here since proofset builds on the solver's query types
    from curve_proximity.helper.proofset import ProofSet, check

    report = ReplayReport(events=len(trace))
    samples: Dict[float, List[float]] = {}
    pending: Optional[Tuple[int, TraceEvent]] = None
    previous_key = None
    terminated = False

    for i, ev in enumerate(trace):
        if ev.event == "sample":
            if pending is not None:
                index, extracted = pending
                midpoint = (extracted.x1 + extracted.x2) / 2
                if ev.t != midpoint:
                    report.failures.append(ReplayFailure("midpoint", i, f"Sampled {ev.t!r} while splitting "
                                                         f"[{extracted.x1!r}, {extracted.x2!r}]"))
                length = extracted.x2 - extracted.x1
                if query.absolute and length <= 2 * query.epsilon - REPLAY_LENGTH_SLACK:
                    report.failures.append(ReplayFailure("subdivision", index, f"Interval of length {length} "
                                                         f"split with epsilon={query.epsilon}"))
                pending = None
            samples[ev.t] = ev.point

        elif ev.event == "extract":
            if previous_key is not None:
                worse = ev.key < previous_key - REPLAY_KEY_TOLERANCE if query.nearest \
                    else ev.key > previous_key + REPLAY_KEY_TOLERANCE
                if worse:
                    report.failures.append(ReplayFailure("monotone", i, f"Extracted key {ev.key} after "
                                                         f"{previous_key}"))
            previous_key = ev.key
            pending = (i, ev)

        elif ev.event == "terminate":
            terminated = ev.reason != "budget"
            pending = None

    if not terminated:
        report.failures.append(ReplayFailure("proofset", len(trace) - 1, "Trace does not end with a certified "
                                                                          "termination"))
        return report

    params = sorted(samples)
    verdict = check(ProofSet(params, [samples[t] for t in params], query))
    if not verdict.passed:
        report.failures.append(ReplayFailure("proofset", len(trace) - 1, f"Final sample set does not certify "
                                                                          f"the query (margin {verdict.margin})"))
    return report


def write_trace(path: str, trace: Iterable[TraceEvent]) -> None:
    with open(path, 'w') as fh:
        for ev in trace:
            fh.write(ev.to_json() + "\n")


def read_trace(path: str) -> List[TraceEvent]:
    trace = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                trace.append(TraceEvent.from_primitives(json.loads(line)))
            except (ValueError, TypeError) as e:
                raise MalformedInputException(f"{path}:{line_no}: invalid trace event ({e})")
    return trace
