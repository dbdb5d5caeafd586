import json
import os

import pytest

# The configuration is loaded when curve_proximity.config is first imported
os.environ.setdefault('CURVE_PROXIMITY_CONFIG', os.path.join(os.path.dirname(__file__), 'config', 'config.yml'))

from curve_proximity.helper.instances import clearance_corpus  # noqa: E402


class InvalidRequestMethod(Exception):
    pass


class APIError(Exception):
    def __init__(self, message, status_code=None, data=None):
        super().__init__(message)
        self.status_code = status_code
        self.data = data


@pytest.fixture(scope='session')
def app():
    from curve_proximity.app import app as flask_app
    flask_app.config.update(TESTING=True)
    return flask_app


@pytest.fixture(scope='function')
def client(app):
    return app.test_client()


@pytest.fixture(scope='session')
def corpus():
    """Seeded random polylines keeping a clearance of 0.5 from the origin, in 2 and 3 dimensions."""
    return clearance_corpus(200, dimensions=(2, 3), seed=1000, clearance=0.5)


@pytest.fixture(scope='session')
def small_corpus(corpus):
    return corpus[:20]


def get_api_data(client, url, params=None, data=None, method="GET", raw=False):
    if method == "GET":
        res = client.get(url, query_string=params)
    elif method == "POST":
        res = client.post(url, data=json.dumps(data) if data is not None else None, query_string=params,
                          content_type='application/json')
    elif method == "DELETE":
        res = client.delete(url, query_string=params)
    else:
        raise InvalidRequestMethod(method)

    if raw:
        return res.data

    try:
        res_data = res.get_json(force=True)
    except Exception:
        raise APIError(f'{res.status_code}: {res.data or None}', res.status_code)

    if res.status_code == 200:
        return res_data['api_response']
    raise APIError(res_data["api_error_message"], res.status_code, res_data["api_response"])
