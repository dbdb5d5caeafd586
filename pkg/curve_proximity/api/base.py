import functools

from flask import current_app, Blueprint, jsonify, make_response, request, Response
from sys import exc_info
from traceback import format_tb
from typing import Any, Dict, Optional

from curve_proximity.config import AUDIT_LOG, DEBUG, LOGGER, VERSION
from curve_proximity.helper.curve import CurveSpec
from curve_proximity.helper.instances import build_instance
from curve_proximity.helper.solver import Query
from curve_proximity.http_exceptions import CurveProximityException, InvalidParameterException, \
    MalformedInputException, OracleCapExceeded
from curve_proximity.logger import log_with_traceback

API_PREFIX = "/api"
api = Blueprint("api", __name__, url_prefix=API_PREFIX)


def make_subapi_blueprint(name, api_version=1):
    """ Create a flask Blueprint for a subapi in a standard way. """
    return Blueprint(name, name, url_prefix='/'.join([API_PREFIX, f"v{api_version}", name]))


####################################
# API Helper func and decorators
# noinspection PyPep8Naming
class api_call(object):
    """
    Wraps an API endpoint: audits the call when running in debug mode and
    turns library errors into API responses (422 when a sample budget or
    grid cap was hit, 400 for any other invalid input).
    """

    def __init__(self, audit=True):
        self.audit = audit

    def __call__(self, func):
        @functools.wraps(func)
        def base(*args, **kwargs):
            if self.audit and DEBUG:
                AUDIT_LOG.info(f"{request.method} {request.path} :: {func.__name__}({kwargs})")

            try:
                return func(*args, **kwargs)
            except OracleCapExceeded as e:
                return make_api_response("", str(e), 422)
            except CurveProximityException as e:
                return make_api_response("", str(e), 400)

        base.audit = self.audit
        return base


def make_api_response(data, err="", status_code=200) -> Response:
    if type(err) is Exception:
        trace = exc_info()[2]
        err = ''.join(['\n'] + format_tb(trace) +
                      ['%s: %s\n' % (err.__class__.__name__, str(err))]).rstrip('\n')
        log_with_traceback(LOGGER, trace, "Exception", is_exception=True)

    return make_response(jsonify({"api_response": data,
                                  "api_error_message": err,
                                  "api_server_version": VERSION,
                                  "api_status_code": status_code}),
                         status_code)


####################################
# Data block helpers

def get_data_block() -> Dict[str, Any]:
    data = request.get_json(force=True)
    if not isinstance(data, dict):
        raise MalformedInputException("The data block must be a JSON object")
    return data


def curve_spec_from_data(data: Optional[Dict[str, Any]]) -> CurveSpec:
    """
    Curve block forms:
        {"vertices": [[x, y], ...], ("knots" | "lipschitz" + "domain")}
        {"kind": "circle-arc", "params": {...}}
        {"family": "spike", "params": {...}}
    """
    if not isinstance(data, dict):
        raise MalformedInputException("A 'curve' block is required")
    if "vertices" in data:
        return CurveSpec("polyline", {k: v for k, v in data.items() if k in ("vertices", "knots", "lipschitz",
                                                                              "domain")})
    if "family" in data:
        return build_instance(data["family"], **data.get("params", {})).curve_spec
    if "kind" in data:
        return CurveSpec(data["kind"], data.get("params", {}))
    raise MalformedInputException("The 'curve' block needs 'vertices', 'kind' or 'family'")


def query_from_data(data: Dict[str, Any]) -> Query:
    if "epsilon" not in data:
        raise InvalidParameterException("'epsilon' is required")
    return Query(data.get("kind", "nearest"), data.get("error_mode", "absolute"), number_from_data(data, "epsilon"))


def number_from_data(data: Dict[str, Any], key: str) -> Optional[float]:
    value = data.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameterException(f"'{key}' must be a number, got {value!r}")
    return float(value)


def budget_from_data(data: Dict[str, Any]) -> Optional[int]:
    value = data.get("budget")
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidParameterException(f"'budget' must be a positive integer, got {value!r}")
    return value


#####################################
# API list API (API inception)
@api.route("/")
@api_call(audit=False)
def api_version_list(**_):
    """
    List all available API versions.

    Variables:
    None

    Arguments:
    None

    Data Block:
    None

    Result example:
    ["v1"]         #List of API versions available
    """
    api_list = []
    for rule in current_app.url_map.iter_rules():
        if rule.rule.startswith("/api/"):
            version = rule.rule[5:].split("/", 1)[0]
            if version not in api_list and version != '':
                # noinspection PyBroadException
                try:
                    int(version[1:])
                except Exception:
                    continue
                api_list.append(version)

    return make_api_response(api_list)
