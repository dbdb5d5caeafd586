import pytest

from conftest import APIError, get_api_data


# noinspection PyUnusedLocal
def test_live(client):
    assert get_api_data(client, "/healthz/live", raw=True) == b"OK"


# noinspection PyUnusedLocal
def test_ready(client):
    assert get_api_data(client, "/healthz/ready", raw=True) == b"OK"


# noinspection PyUnusedLocal
def test_unknown_path(client):
    with pytest.raises(APIError) as excinfo:
        get_api_data(client, "/api/v1/nothing/here/")
    assert excinfo.value.status_code == 404


# noinspection PyUnusedLocal
def test_ready_fails_when_the_solver_does(client, monkeypatch):
    from curve_proximity import healthz
    from curve_proximity.http_exceptions import InvalidParameterException

    def broken(*_, **__):
        raise InvalidParameterException("solver unavailable")

    monkeypatch.setattr(healthz, "solve", broken)
    res = client.get("/healthz/ready")
    assert res.status_code == 503
    assert res.data == b"FAIL"


# noinspection PyUnusedLocal
def test_ready_checks_the_answer(client, monkeypatch):
    from curve_proximity import healthz

    real_solve = healthz.solve

    def off_by_a_sample(curve, query, budget=None):
        result = real_solve(curve, query, budget)
        result.samples_used += 1
        return result

    monkeypatch.setattr(healthz, "solve", off_by_a_sample)
    assert client.get("/healthz/ready").status_code == 503
