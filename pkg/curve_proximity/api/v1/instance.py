from flask import request

from curve_proximity.api.base import api_call, make_api_response, make_subapi_blueprint
from curve_proximity.helper.instances import FAMILIES

SUB_API = 'instance'
instance_api = make_subapi_blueprint(SUB_API, api_version=1)
instance_api._doc = "Generate benchmark instances with known ground truth"


@instance_api.route("/families/", methods=["GET"])
@api_call(audit=False)
def list_families(**_):
    """
    List the instance families and their parameters

    Variables:
    None

    Arguments:
    None

    Data Block:
    None

    Result example:
    [
     {"name": "spike",
      "description": "Baseline with k spikes, one of them toward the origin",
      "params": {"k": null, "epsilon": null, "down_index": null, "seed": 0},
      "required": ["k", "epsilon"]},
     ...
    ]
    """
    return make_api_response([f.as_primitives() for f in FAMILIES.values()])


@instance_api.route("/<family>/", methods=["GET", "POST"])
@api_call()
def generate_instance(family, **_):
    """
    Generate an instance of the given family

    Variables:
    family       =>   Name of the instance family

    Arguments:
    Any family parameter (ie: ?k=4&epsilon=0.0417&seed=7)

    Data Block (POST only):
    {"k": 4, "epsilon": 0.0417, "seed": 7}   # Family parameters, override the arguments

    Result example:
    {
     "family": "spike",
     "epsilon": 0.0417,
     "curve": {"kind": "polyline", "params": {"vertices": [...]}},
     "metadata": {"d_min": 3.12, "d_max": 3.2, "opt_upper_bound": 14, ...},
     "knots": [0.0, ...],               # Normalized curve knots
     "vertices": [[...], ...]           # Normalized curve vertices
    }
    """
    if family not in FAMILIES:
        return make_api_response("", f"Unknown instance family '{family}'. Valid families are: {sorted(FAMILIES)}",
                                 404)

    params = request.args.to_dict()
    if request.method == "POST":
        data = request.get_json(force=True, silent=True)
        if isinstance(data, dict):
            params.update(data)

    bundle = FAMILIES[family].build(**params)
    curve = bundle.curve()
    out = bundle.as_primitives()
    out["knots"] = curve.knots.tolist()
    out["vertices"] = curve.points.tolist()
    return make_api_response(out)
