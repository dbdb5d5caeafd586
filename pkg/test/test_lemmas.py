import math

import numpy as np
import pytest

from curve_proximity.helper.lemmas import LEMMA_CHECKS, LemmaConfiguration, Verdict, check_ellipse_lemma, \
    check_farellipse_proposition, check_inverted_ellipse_lemma, check_naive_inverted_ellipse_lemma, \
    farellipse_minimizing_cosine, farellipse_residual, find_naive_inversion_violation, \
    naive_inversion_counterexample, run_lemma_harness
from curve_proximity.http_exceptions import InvalidParameterException

SOUND_LEMMAS = [name for name in LEMMA_CHECKS if name != "naive-inverted"]


@pytest.mark.parametrize("name", SOUND_LEMMAS)
def test_harness_finds_no_failures(name):
    report = run_lemma_harness(name, trials=10_000, seed=0)
    assert report.failed == 0, report.failures[:1]
    assert report.passed + report.vacuous == 10_000
    assert report.passed > 0


@pytest.mark.parametrize("name", ["ellipse", "inverted"])
def test_harness_in_three_dimensions(name):
    report = run_lemma_harness(name, trials=500, seed=1, dimension=3)
    assert report.failed == 0
    assert report.passed > 0


def test_harness_is_seeded():
    first = run_lemma_harness("corollary-1", trials=300, seed=4)
    second = run_lemma_harness("corollary-1", trials=300, seed=4)
    assert (first.passed, first.vacuous) == (second.passed, second.vacuous)


def test_harness_unknown_lemma():
    with pytest.raises(InvalidParameterException):
        run_lemma_harness("pythagoras", trials=10)


#####################################
# Naive inversion

def test_naive_inversion_counterexample():
    config = naive_inversion_counterexample(0.1, 0.1)
    assert config.d == pytest.approx(1.1)

    naive = check_naive_inverted_ellipse_lemma(config)
    assert naive.verdict == Verdict.FAIL
    assert naive.quantities["farthest_14"] == pytest.approx(1.1976, abs=1e-3)
    assert naive.quantities["farthest_14"] < 1.2

    # The weaker margin still holds on the same samples
    inverted = check_inverted_ellipse_lemma(config)
    assert inverted.verdict == Verdict.PASS
    assert inverted.quantities["farthest_12"] >= 1.1
    assert inverted.quantities["farthest_34"] >= 1.1


def test_random_search_finds_a_naive_violation():
    config = find_naive_inversion_violation(1000, seed=0)
    assert config is not None
    assert check_naive_inverted_ellipse_lemma(config).failed
    assert not check_inverted_ellipse_lemma(config).failed


#####################################
# Far ellipse proposition

@pytest.mark.parametrize("a", [0.01, 0.1, 0.5, 2.0])
def test_farellipse_residual_minimum(a):
    c = farellipse_minimizing_cosine(a)
    assert farellipse_residual(a, c) == pytest.approx(288 * a ** 3 / (25 * (5 + 8 * a)), abs=1e-10)
    assert farellipse_residual(a, c) > 0
    for other in [c - 0.01, c + 0.01, 0.0, 1.0]:
        assert farellipse_residual(a, other) >= farellipse_residual(a, c)


def test_farellipse_proposition_at_zero_angle():
    verdict = check_farellipse_proposition(0.1, 0.0)
    assert verdict.verdict == Verdict.PASS
    assert verdict.quantities["lhs"] == pytest.approx(0.2)
    assert verdict.quantities["rhs"] == pytest.approx(0.16)


@pytest.mark.parametrize("a", [0.05, 0.3, 1.0])
def test_farellipse_proposition_over_angles(a):
    for i in range(61):
        verdict = check_farellipse_proposition(a, math.pi * i / 60)
        assert verdict.verdict == Verdict.PASS
        lhs, rhs = verdict.quantities["lhs"], verdict.quantities["rhs"]
        # Both sides of the residual identity agree
        assert lhs ** 2 - rhs ** 2 == pytest.approx(verdict.quantities["residual"], abs=1e-9)


def test_farellipse_proposition_random_sweep():
    rng = np.random.default_rng(5)
    for a, angle in zip(10 ** rng.uniform(-2.0, math.log10(2.0), 10_000), rng.uniform(0.0, math.pi, 10_000)):
        verdict = check_farellipse_proposition(float(a), float(angle))
        assert verdict.verdict == Verdict.PASS, (a, angle)
        assert verdict.quantities["lhs"] >= verdict.quantities["rhs"] - 1e-9


def test_farellipse_proposition_needs_positive_a():
    with pytest.raises(InvalidParameterException):
        check_farellipse_proposition(0.0, 0.5)


#####################################
# Configurations

def test_vacuous_configuration():
    config = LemmaConfiguration((0.0, 0.1, 0.2, 0.3), [(0.0, 1.0)] * 4, d=1.0, a=0.1)
    verdict = check_ellipse_lemma(config)
    assert verdict.verdict == Verdict.VACUOUS
    assert verdict.quantities["closest_12"] == pytest.approx(0.95)
    assert "closest_14" not in verdict.quantities


def test_configuration_errors():
    with pytest.raises(InvalidParameterException):
        LemmaConfiguration((0.0, 0.1), [(0.0, 1.0), (0.0, 2.0)], d=1.0)
    with pytest.raises(InvalidParameterException):
        LemmaConfiguration((0.2, 0.1), [(0.0, 1.0), (0.0, 1.0)], d=1.0)
    with pytest.raises(InvalidParameterException):
        LemmaConfiguration((0.0, 0.1), [(0.0, 1.0)], d=1.0)

    config = LemmaConfiguration((0.0, 0.1, 0.2), [(0.0, 1.0)] * 3, d=1.0, a=0.1)
    with pytest.raises(InvalidParameterException):
        check_ellipse_lemma(config)
