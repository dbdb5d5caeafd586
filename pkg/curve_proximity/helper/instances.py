"""
Instance generators with exact ground truth.

Every generator returns an InstanceBundle whose curve is normalized (domain
[0, 1], Lipschitz constant 1, query point at the origin) and whose metadata
holds the exact extremal distances, an upper bound on the optimal sample count
where one is known, and the generator parameters needed to rebuild it.
"""
import math
import os

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from curve_proximity.config import DEFAULT_SEED, LOGGER
from curve_proximity.helper.curve import Curve, CurveSpec, point_segment_distance, read_polyline, write_polyline
from curve_proximity.http_exceptions import InvalidParameterException, MalformedInputException

CURVE_FILE = "curve.txt"
METADATA_FILE = "metadata.txt"
PARAM_PREFIX = "param."
DIRECTION_ATTEMPTS = 32


@dataclass
class InstanceBundle:
    family: str
    curve_spec: CurveSpec
    epsilon: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def curve(self) -> Curve:
        return self.curve_spec.build()

    @property
    def params(self) -> Dict[str, Any]:
        return {k[len(PARAM_PREFIX):]: v for k, v in self.metadata.items() if k.startswith(PARAM_PREFIX)}

    @property
    def d_min(self) -> float:
        return self.metadata["d_min"]

    @property
    def d_max(self) -> float:
        return self.metadata["d_max"]

    @property
    def opt_upper_bound(self) -> Optional[int]:
        return self.metadata.get("opt_upper_bound")

    def vertices(self) -> np.ndarray:
        return self.curve().points

    def write(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        write_polyline(os.path.join(directory, CURVE_FILE), self.vertices(),
                       comments=[f"{self.family} instance, epsilon={self.epsilon!r}"])
        with open(os.path.join(directory, METADATA_FILE), 'w') as fh:
            fh.write(f"family={self.family}\n")
            fh.write(f"epsilon={self.epsilon!r}\n")
            for key, value in self.metadata.items():
                fh.write(f"{key}={_format_value(value)}\n")

    def as_primitives(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "epsilon": self.epsilon,
            "curve": self.curve_spec.as_primitives(),
            "metadata": dict(self.metadata),
        }


def _format_value(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _parse_scalar(text: str):
    if text == "NA":
        return None
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_value(text: str):
    if "," in text:
        return [_parse_scalar(v) for v in text.split(",")]
    return _parse_scalar(text)


def read_metadata(path: str) -> Dict[str, Any]:
    metadata = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise MalformedInputException(f"{path}:{line_no}: expected key=value")
            key, value = line.split('=', 1)
            metadata[key.strip()] = _parse_value(value.strip())
    return metadata


def read_bundle(directory: str) -> InstanceBundle:
    """
    Load a bundle written by InstanceBundle.write. Curves that are not unit
    speed (knotted) are rebuilt from the family parameters in the metadata.
    """
    metadata_path = os.path.join(directory, METADATA_FILE)
    if not os.path.exists(metadata_path):
        raise MalformedInputException(f"{directory} is not an instance bundle: missing {METADATA_FILE}")

    metadata = read_metadata(metadata_path)
    family = metadata.pop("family", None)
    epsilon = metadata.pop("epsilon", None)
    if family is None or epsilon is None:
        raise MalformedInputException(f"{metadata_path}: family and epsilon are required")

    if metadata.get("curve") == "knotted":
        params = {k[len(PARAM_PREFIX):]: v for k, v in metadata.items() if k.startswith(PARAM_PREFIX)}
        return build_instance(family, **params)

    vertices = read_polyline(os.path.join(directory, CURVE_FILE))
    return InstanceBundle(str(family), CurveSpec("polyline", {"vertices": vertices.tolist()}), float(epsilon),
                          metadata)


def _finish(family: str, spec: CurveSpec, epsilon: float, params: Dict[str, Any], knotted: bool = False,
            **extra) -> InstanceBundle:
    curve = spec.build()
    metadata: Dict[str, Any] = {
        "curve": "knotted" if knotted else "unit-speed",
        "d_min": curve.min_distance(),
        "d_max": curve.max_distance(),
    }
    metadata.update(extra)
    metadata.update({f"{PARAM_PREFIX}{k}": v for k, v in params.items()})
    LOGGER.debug(f"Generated {family} instance: d_min={metadata['d_min']}, d_max={metadata['d_max']}")
    return InstanceBundle(family, spec, float(epsilon), metadata)


def _check_epsilon(epsilon: float, upper: float = 0.5):
    if not 0 < epsilon < upper:
        raise InvalidParameterException(f"epsilon must be in (0, {upper}), got {epsilon}")


#####################################
# Families

def constant_instance(point: Sequence[float] = (0.0, 1.0), epsilon: float = 0.1) -> InstanceBundle:
    _check_epsilon(epsilon)
    point = [float(c) for c in point]
    norm = float(np.linalg.norm(point))
    if norm <= epsilon:
        raise InvalidParameterException(f"The constant point must be farther than epsilon from the origin, "
                                        f"got |p|={norm} with epsilon={epsilon}")

    spec = CurveSpec("constant", {"point": point})
    return _finish("constant", spec, epsilon, {"point": point, "epsilon": epsilon}, knotted=True,
                   opt_upper_bound=math.ceil(1 / (2 * epsilon) - 1e-12) + 1)


def segment_instance(height: float = 0.3, epsilon: float = 0.1) -> InstanceBundle:
    """C(x) = (x - 1/2, height)."""
    _check_epsilon(epsilon)
    if height < 0:
        raise InvalidParameterException(f"Segment height must be non-negative, got {height}")
    spec = CurveSpec("polyline", {"vertices": [[-0.5, height], [0.5, height]]})
    return _finish("segment", spec, epsilon, {"height": height, "epsilon": epsilon}, opt_upper_bound=3)


def spike_family(k: int, epsilon: float, down_index: Optional[int] = None, seed: int = DEFAULT_SEED) -> InstanceBundle:
    """
    Baseline parallel to the x axis split into n = round(1 / (3 epsilon))
    regions of parameter width 1/n, grouped into k groups. One region per
    group is a vertical out-and-back spike of height 1/(2n); the spike of
    group `down_index` points toward the origin, the others away from it.

    The baseline height is raised above 1 when needed so that the down spike
    tip is the only point within epsilon of the nearest distance. The
    metadata keeps `nominal_baseline` and `nominal_d_min` (baseline 1) next to
    the measured `baseline` and `d_min`.
    """
    _check_epsilon(epsilon)
    n = round(1 / (3 * epsilon))
    if not 1 <= k <= n:
        raise InvalidParameterException(f"Spike family needs 1 <= k <= n, got k={k} with n={n} "
                                        f"(epsilon={epsilon})")

    rng = np.random.default_rng(seed)
    if down_index is None:
        down_index = int(rng.integers(1, k + 1))
    if not 1 <= down_index <= k:
        raise InvalidParameterException(f"down_index must be in [1, {k}], got {down_index}")

    height = 1 / (2 * n)
    if not height > epsilon:
        raise InvalidParameterException(f"Spike height {height} does not exceed epsilon={epsilon}")
    half_width = (n - k) / (2 * n)
    baseline = max(1.0, (half_width ** 2 + height ** 2) / (height - epsilon))

    spike_regions = {}
    for group in range(k):
        lo, hi = group * n // k, (group + 1) * n // k
        spike_regions[int(rng.integers(lo, hi))] = -1.0 if group == down_index - 1 else 1.0

    x = -half_width
    vertices = [[x, baseline]]
    tips = []
    for region in range(n):
        direction = spike_regions.get(region)
        if direction is None:
            x += 1 / n
            vertices.append([x, baseline])
        else:
            tips.append((len(vertices), direction))
            vertices.append([x, baseline + direction * height])
            vertices.append([x, baseline])

    spec = CurveSpec("polyline", {"vertices": vertices})
    knots = spec.build().knots
    spike_parameters = [float(knots[i]) for i, _ in tips]
    down_parameter = [float(knots[i]) for i, d in tips if d < 0][0]

    params = {"k": k, "epsilon": epsilon, "down_index": down_index, "seed": seed}
    return _finish("spike", spec, epsilon, params, n=n, spike_height=height, baseline=baseline,
                   spike_parameters=spike_parameters, down_parameter=down_parameter,
                   nominal_baseline=1.0, nominal_d_min=1.0 - height, opt_upper_bound=3 * k + 2)


def hidden_spike_slots(epsilon: float) -> int:
    return math.floor(1 / (4 * epsilon) + 1e-9)


def hidden_spike_instance(epsilon: float, slot: int = 1) -> InstanceBundle:
    """
    C(x) = (0, 2.5 epsilon) except on one slot [x1, x1 + 4 epsilon], where it
    dips linearly to (0, epsilon / 2) at the slot midpoint and back.
    """
    _check_epsilon(epsilon)
    slots = hidden_spike_slots(epsilon)
    if slots < 2:
        raise InvalidParameterException(f"epsilon={epsilon} leaves fewer than 2 slots of width 4 epsilon")
    if not 1 <= slot <= slots:
        raise InvalidParameterException(f"slot must be in [1, {slots}], got {slot}")

    x1 = (slot - 1) * 4 * epsilon
    flat, tip = [0.0, 2.5 * epsilon], [0.0, 0.5 * epsilon]
    knots, vertices = [0.0], [flat]
    for t, p in [(x1, flat), (x1 + 2 * epsilon, tip), (x1 + 4 * epsilon, flat), (1.0, flat)]:
        t = min(t, 1.0)
        if t > knots[-1]:
            knots.append(t)
            vertices.append(p)

    spec = CurveSpec("polyline", {"vertices": vertices, "knots": knots, "lipschitz": 1.0})
    return _finish("hidden-spike", spec, epsilon, {"epsilon": epsilon, "slot": slot}, knotted=True,
                   slots=slots, spike_interval=[x1, min(x1 + 4 * epsilon, 1.0)],
                   down_parameter=x1 + 2 * epsilon, opt_upper_bound=3)


def relative_spike_ratio(epsilon: float, kind: str) -> float:
    """Smallest spike to segment length ratio S/L that leaves only spike points as solutions."""
    ratio = math.sqrt(epsilon ** 2 + 2 * epsilon) / (2 * epsilon + 2)
    return ratio * (1 + epsilon) if kind == "farthest" else ratio


def relative_segment_family(k: int, epsilon: float, down_index: Optional[int] = None, seed: int = DEFAULT_SEED,
                            kind: str = "nearest", spike_ratio: Optional[float] = None) -> InstanceBundle:
    """
    k copies of a segment gadget of length L at distance D from the origin,
    each with one vertical spike of length S at a seeded position, traversed
    in alternating directions so consecutive copies join up. Total length is
    exactly 1.

    In nearest mode one spike points toward the origin and the rest away from
    it; in farthest mode the roles are flipped.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameterException(f"epsilon must be in (0, 1), got {epsilon}")
    if k < 1:
        raise InvalidParameterException(f"k must be at least 1, got {k}")
    if kind not in ("nearest", "farthest"):
        raise InvalidParameterException(f"kind must be nearest or farthest, got {kind}")

    rng = np.random.default_rng(seed)
    if down_index is None:
        down_index = int(rng.integers(1, k + 1))
    if not 1 <= down_index <= k:
        raise InvalidParameterException(f"down_index must be in [1, {k}], got {down_index}")

    if spike_ratio is None:
        spike_ratio = math.sqrt(epsilon) * ((1 + epsilon) if kind == "farthest" else 1.0)
    required = relative_spike_ratio(epsilon, kind)
    if not spike_ratio > required:
        raise InvalidParameterException(f"Spike ratio S/L={spike_ratio} violates S/L > {required} "
                                        f"for epsilon={epsilon} ({kind})")

    length = 1 / (k * (1 + 2 * spike_ratio))
    spike = spike_ratio * length
    distance = length / (2 * math.sqrt(epsilon * (2 + epsilon)))
    if kind == "nearest" and distance <= spike:
        raise InvalidParameterException(f"Spike of length {spike} reaches the origin from distance {distance} "
                                        f"for epsilon={epsilon}")

    toward = -1.0 if kind == "nearest" else 1.0
    vertices: List[List[float]] = []
    tips = []
    for gadget in range(k):
        position = float(rng.uniform(-length / 2, length / 2))
        direction = toward if gadget == down_index - 1 else -toward
        ends = [-length / 2, length / 2] if gadget % 2 == 0 else [length / 2, -length / 2]
        if not vertices:
            vertices.append([ends[0], distance])
        tips.append((len(vertices) + 1, direction))
        vertices.extend([[position, distance], [position, distance + direction * spike],
                         [position, distance], [ends[1], distance]])

    spec = CurveSpec("polyline", {"vertices": vertices})
    curve = spec.build()
    raw_knots = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(np.array(vertices), axis=0), axis=1))])
    raw_knots /= raw_knots[-1]
    spike_parameters = [float(raw_knots[i]) for i, _ in tips]
    down_parameter = [float(raw_knots[i]) for i, d in tips if d == toward][0]

    params = {"k": k, "epsilon": epsilon, "down_index": down_index, "seed": seed, "kind": kind,
              "spike_ratio": spike_ratio}
    LOGGER.debug(f"Relative segment gadgets: L={length}, S={spike}, D={distance}, total={curve.knots[-1]}")
    return _finish("rel-segments", spec, epsilon, params, segment_length=length, spike_length=spike,
                   segment_distance=distance, spike_parameters=spike_parameters,
                   down_parameter=down_parameter, opt_upper_bound=5 * k)


def random_polyline(n_vertices: int = 8, dimension: int = 2, seed: int = DEFAULT_SEED, clearance: float = 0.5,
                    epsilon: float = 0.1) -> InstanceBundle:
    """
    Seeded unit-length polyline whose segments all keep at least `clearance`
    from the origin. Segment lengths are Dirichlet distributed, directions are
    uniform with rejection, falling back to heading radially outward.
    """
    if n_vertices < 2:
        raise InvalidParameterException(f"A polyline needs at least 2 vertices, got {n_vertices}")
    if dimension < 1:
        raise InvalidParameterException(f"dimension must be at least 1, got {dimension}")
    if clearance < 0:
        raise InvalidParameterException(f"clearance must be non-negative, got {clearance}")

    rng = np.random.default_rng(seed)

    def direction():
        v = rng.normal(size=dimension)
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else np.eye(dimension)[0]

    lengths = rng.dirichlet(np.ones(n_vertices - 1))
    current = direction() * (clearance + rng.uniform(0.05, 0.5))
    vertices = [current]
    for length in lengths:
        for _ in range(DIRECTION_ATTEMPTS):
            candidate = current + length * direction()
            if point_segment_distance(np.zeros(dimension), current, candidate) >= clearance:
                break
        else:
            radial = current / np.linalg.norm(current)
            candidate = current + length * radial
        vertices.append(candidate)
        current = candidate

    spec = CurveSpec("polyline", {"vertices": np.array(vertices).tolist()})
    params = {"n_vertices": n_vertices, "dimension": dimension, "seed": seed, "clearance": clearance,
              "epsilon": epsilon}
    return _finish("random", spec, epsilon, params)


def clearance_corpus(count: int, dimensions: Sequence[int] = (2, 3), seed: int = DEFAULT_SEED,
                     clearance: float = 0.5, n_vertices: int = 8) -> List[InstanceBundle]:
    return [random_polyline(n_vertices, dimensions[i % len(dimensions)], seed + i, clearance)
            for i in range(count)]


#####################################
# Registry

@dataclass
class Family:
    name: str
    generator: Callable[..., InstanceBundle]
    defaults: Dict[str, Any]
    description: str

    def build(self, **params) -> InstanceBundle:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise InvalidParameterException(f"Unknown parameters for family '{self.name}': {sorted(unknown)}. "
                                            f"Valid parameters are: {sorted(self.defaults)}")
        merged = dict(self.defaults)
        for key, value in params.items():
            merged[key] = _coerce(key, value, self.defaults[key])
        missing = [k for k, v in merged.items() if v is REQUIRED]
        if missing:
            raise InvalidParameterException(f"Missing parameters for family '{self.name}': {missing}")
        return self.generator(**merged)

    def as_primitives(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "params": {k: (None if v is REQUIRED else v) for k, v in self.defaults.items()},
            "required": [k for k, v in self.defaults.items() if v is REQUIRED],
        }


class _Required:
    def __repr__(self):
        return "REQUIRED"


REQUIRED = _Required()
INTEGER_PARAMS = {"k", "down_index", "seed", "slot", "n_vertices", "dimension"}
FLOAT_PARAMS = {"epsilon", "height", "clearance", "spike_ratio"}


def _coerce(key: str, value, default):
    if value is None:
        return None
    try:
        if key in INTEGER_PARAMS:
            return int(value)
        if key in FLOAT_PARAMS:
            return float(value)
        if key == "point":
            if isinstance(value, str):
                value = value.split(',')
            return [float(c) for c in value]
    except (TypeError, ValueError):
        raise InvalidParameterException(f"Invalid value for '{key}': {value!r}")
    return value


FAMILIES: Dict[str, Family] = {f.name: f for f in [
    Family("constant", constant_instance, {"point": [0.0, 1.0], "epsilon": 0.1},
           "Constant curve C(x) = p"),
    Family("segment", segment_instance, {"height": 0.3, "epsilon": 0.1},
           "Horizontal segment C(x) = (x - 1/2, height)"),
    Family("spike", spike_family, {"k": REQUIRED, "epsilon": REQUIRED, "down_index": None, "seed": DEFAULT_SEED},
           "Baseline with k spikes, one of them toward the origin"),
    Family("hidden-spike", hidden_spike_instance, {"epsilon": REQUIRED, "slot": 1},
           "Flat curve at height 2.5 epsilon hiding one dip to epsilon / 2"),
    Family("rel-segments", relative_segment_family,
           {"k": REQUIRED, "epsilon": REQUIRED, "down_index": None, "seed": DEFAULT_SEED, "kind": "nearest",
            "spike_ratio": None},
           "k segment gadgets with spikes, for relative error queries"),
    Family("random", random_polyline,
           {"n_vertices": 8, "dimension": 2, "seed": DEFAULT_SEED, "clearance": 0.5, "epsilon": 0.1},
           "Seeded random polyline keeping a clearance from the origin"),
]}


def build_instance(family: str, **params) -> InstanceBundle:
    if family not in FAMILIES:
        raise InvalidParameterException(f"Unknown instance family '{family}'. Valid families are: "
                                        f"{sorted(FAMILIES)}")
    return FAMILIES[family].build(**params)


def realize_adversarial_curve(params: Dict[str, Any]) -> Curve:
    params = dict(params)
    family = params.pop("family", None)
    if family is None:
        raise InvalidParameterException("An adversarial-instance curve needs a 'family' parameter")
    return build_instance(family, **params).curve_spec.raw()
