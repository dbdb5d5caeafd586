from curve_proximity.api.base import api_call, budget_from_data, curve_spec_from_data, get_data_block, \
    make_api_response, make_subapi_blueprint, query_from_data
from curve_proximity.helper.curve import InstrumentedCurve
from curve_proximity.helper.solver import solve, uniform_baseline
from curve_proximity.http_exceptions import SampleBudgetExceeded

SUB_API = 'query'
query_api = make_subapi_blueprint(SUB_API, api_version=1)
query_api._doc = "Nearest and farthest point queries on Lipschitz curves"


@query_api.route("/", methods=["POST"])
@api_call()
def run_query(**_):
    """
    Find a point of the curve nearest to (or farthest from) the query point,
    up to an absolute or relative error epsilon.

    Variables:
    None

    Arguments:
    None

    Data Block:
    {
     "curve": {"vertices": [[-0.5, 0.3], [0.5, 0.3]]},   # Curve block (vertices, kind/params or family/params)
     "kind": "nearest",                                  # nearest | farthest
     "error_mode": "absolute",                           # absolute | relative
     "epsilon": 0.2,                                     # Error tolerance
     "query_point": [0, 0],                              # Optional, defaults to the origin
     "budget": 1000,                                     # Optional sample budget
     "trace": false                                      # Include the solver trace
    }

    Result example:
    {
     "x_star": 0.5,                 # Parameter of the answer
     "point": [0.0, 0.3],           # Curve point at x_star
     "distance": 0.3,               # Its distance to the query point
     "certified_lower": 0.3,        # Certified bounds on the extremal distance
     "certified_upper": 0.3,
     "samples_used": 3,             # Distinct curve evaluations
     "terminated": true,
     "query": {"kind": "nearest", "error_mode": "absolute", "epsilon": 0.2}
    }
    """
    data = get_data_block()
    curve, back_map = curve_spec_from_data(data.get("curve")).normalize(data.get("query_point"))
    query = query_from_data(data)
    include_trace = bool(data.get("trace", False))

    try:
        result = solve(InstrumentedCurve(curve), query, budget=budget_from_data(data))
    except SampleBudgetExceeded as e:
        partial = e.partial.as_primitives(back_map, include_trace) if e.partial is not None else ""
        return make_api_response(partial, str(e), 422)

    return make_api_response(result.as_primitives(back_map, include_trace))


@query_api.route("/baseline/", methods=["POST"])
@api_call()
def run_baseline(**_):
    """
    Answer an absolute error query by sampling the curve every 2 * epsilon.

    Variables:
    None

    Arguments:
    None

    Data Block:
    {
     "curve": {"vertices": [[0, 1], [0, 1]], "knots": [0, 1], "lipschitz": 1},
     "kind": "nearest",
     "error_mode": "absolute",
     "epsilon": 0.1
    }

    Result example:
    {
     "x_star": 0.0,
     "point": [0.0, 1.0],
     "distance": 1.0,
     "certified_lower": 0.9,
     "certified_upper": 1.0,
     "samples_used": 6,
     "terminated": true,
     "query": {...}
    }
    """
    data = get_data_block()
    curve, back_map = curve_spec_from_data(data.get("curve")).normalize(data.get("query_point"))
    result = uniform_baseline(InstrumentedCurve(curve), query_from_data(data))
    return make_api_response(result.as_primitives(back_map, bool(data.get("trace", False))))
