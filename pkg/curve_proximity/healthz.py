from flask import Blueprint, abort, make_response

from curve_proximity.config import LOGGER
from curve_proximity.helper.curve import InstrumentedCurve
from curve_proximity.helper.instances import constant_instance
from curve_proximity.helper.solver import ErrorMode, Query, QueryKind, solve
from curve_proximity.http_exceptions import CurveProximityException

API_PREFIX = "/healthz"
healthz = Blueprint("healthz", __name__, url_prefix=API_PREFIX)

READY_EPSILON = 0.25


def _solver_ready() -> bool:
    # Nearest point of the constant curve at (0, 1): three samples, distance 1
    try:
        bundle = constant_instance((0.0, 1.0), READY_EPSILON)
        result = solve(InstrumentedCurve(bundle.curve()), Query(QueryKind.NEAREST, ErrorMode.ABSOLUTE, READY_EPSILON))
    except CurveProximityException as e:
        LOGGER.warning(f"Readiness query failed: {e}")
        return False
    return result.terminated and result.samples_used == 3 and abs(result.distance - bundle.d_min) < 1e-12


@healthz.route("/live")
def liveness(**_):
    """
    Check if the API is live

    Variables:
    None

    Arguments:
    None

    Data Block:
    None

    Result example:
    OK or FAIL
    """
    return make_response("OK")


@healthz.route("/ready")
def readyness(**_):
    """
    Check if the API is ready by running a small nearest point query

    Variables:
    None

    Arguments:
    None

    Data Block:
    None

    Result example:
    OK or FAIL
    """
    if _solver_ready():
        return make_response("OK")
    else:
        abort(503)


@healthz.errorhandler(503)
def error(_):
    return "FAIL", 503
