from curve_proximity.api.base import api_call, curve_spec_from_data, get_data_block, make_api_response, \
    make_subapi_blueprint, number_from_data, query_from_data
from curve_proximity.helper.proofset import ProofSet, check, min_proofset_grid
from curve_proximity.http_exceptions import MalformedInputException

SUB_API = 'proofset'
proofset_api = make_subapi_blueprint(SUB_API, api_version=1)
proofset_api._doc = "Check proof sets and estimate the smallest one"


@proofset_api.route("/verify/", methods=["POST"])
@api_call()
def verify_proofset(**_):
    """
    Check whether a set of samples certifies the answer to a query

    Variables:
    None

    Arguments:
    None

    Data Block:
    {
     "proofset": {"params": [0, 0.5, 1],            # Sorted sample parameters, 0 and 1 included
                  "points": [[...], ...]},          # Optional with a curve, checked against it if both
     "curve": {"vertices": [...]},                  # Optional, normalized before evaluation
     "kind": "nearest",
     "error_mode": "absolute",
     "epsilon": 0.2
    }

    Result example:
    {
     "passed": true,          # Does the set certify the query?
     "margin": 0.2,           # How far inside the tolerance the worst gap is
     "incumbent": 0.3,        # Best sampled distance
     "bound": 0.3,            # Extremal gap bound
     "incumbent_index": 1,
     "worst_gap": 0
    }
    """
    data = get_data_block()
    query = query_from_data(data)
    block = data.get("proofset")
    if not isinstance(block, dict) or "params" not in block:
        raise MalformedInputException("A 'proofset' block with 'params' is required")

    if "points" in block:
        ps = ProofSet(block["params"], block["points"], query)
        if "curve" in data:
            ps.check_on_curve(curve_spec_from_data(data["curve"]).build(data.get("query_point")))
    elif "curve" in data:
        curve = curve_spec_from_data(data["curve"]).build(data.get("query_point"))
        ps = ProofSet.from_curve(curve, block["params"], query)
    else:
        raise MalformedInputException("Either proofset points or a curve are required")

    verdict = check(ps)
    return make_api_response({
        "passed": bool(verdict.passed),
        "margin": float(verdict.margin),
        "incumbent": verdict.incumbent,
        "bound": verdict.bound,
        "incumbent_index": verdict.incumbent_index,
        "worst_gap": verdict.worst_gap,
    })


@proofset_api.route("/opt/", methods=["POST"])
@api_call()
def estimate_opt(**_):
    """
    Size of the smallest proof set restricted to a parameter grid

    Variables:
    None

    Arguments:
    None

    Data Block:
    {
     "curve": {"family": "constant", "params": {"point": [0, 1]}},
     "kind": "nearest",
     "error_mode": "absolute",
     "epsilon": 0.25,
     "grid_step": 0.03125          # Optional, defaults to epsilon / grid_divisor
    }

    Result example:
    {
     "opt_est": 3,                 # null when no grid set certifies the query
     "grid_step": 0.03125,
     "witness": [0.0, 0.5, 1.0]
    }
    """
    data = get_data_block()
    curve = curve_spec_from_data(data.get("curve")).build(data.get("query_point"))
    estimate = min_proofset_grid(curve, query_from_data(data), grid_step=number_from_data(data, "grid_step"))
    return make_api_response({"opt_est": estimate.value, "grid_step": estimate.grid_step,
                              "witness": estimate.witness})
