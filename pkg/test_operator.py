"""
Tests for the Smirnov-operator route: weights, harmonic identities and E(B_j).
"""

import random
from fractions import Fraction

import pytest

from config import load_settings
from conftest import random_distributions, run_specs
from models.distribution import AlphabetDistribution, RunSpec, parse_distribution
from services.closed_form_service import ClosedFormService
from services.operator_service import (
    OperatorLimitError,
    OperatorService,
    SingularEvaluationError,
    assignment_weight,
    harmonic,
    harmonic_alternating,
    smirnov_eval,
)

service = OperatorService(load_settings(max_operator_r=20))


def test_smirnov_simple_values():
    assert smirnov_eval([Fraction(0), Fraction(0)]) == 1
    assert smirnov_eval([Fraction(1), Fraction(0)]) == 2
    assert smirnov_eval([Fraction(1, 2), Fraction(1, 2)]) == 3
    assert smirnov_eval([Fraction(1, 2), Fraction(1, 2), Fraction(1, 1)]) == -6


def test_smirnov_regeneration():
    rng = random.Random(7)
    dist = parse_distribution("1/2,1/3,1/6")
    for _ in range(20):
        z = Fraction(rng.randint(-99, 99), 100)
        x = [p * z / (1 - p * z) for p in dist.probs]
        assert smirnov_eval(x) == 1 / (1 - z)


def test_smirnov_poles(fair_coin):
    gamma = service.substitution_values(fair_coin, RunSpec.uniform(2, 2)).gamma
    with pytest.raises(SingularEvaluationError):
        smirnov_eval(gamma)
    with pytest.raises(ZeroDivisionError):
        smirnov_eval([Fraction(-1), Fraction(0)])


@pytest.mark.parametrize("r", range(1, 11))
def test_assignment_weights_for_all_letters(r):
    assert assignment_weight(r, r, r) == 0
    for t in range(r):
        assert assignment_weight(r, r, t) == (-1) ** (r - t + 1)


def test_assignment_weights_first_run():
    # j = 1 keeps only the all-alpha assignment
    assert assignment_weight(5, 1, 0) == 1
    assert all(assignment_weight(5, 1, t) == 0 for t in range(1, 6))


def test_substitution_values(fair_die):
    values = service.substitution_values(fair_die, RunSpec.uniform(2, 6))
    assert values.alpha == (Fraction(1, 6),) * 6
    assert values.gamma == (Fraction(1, 5),) * 6
    assert values.assignment(0b000011)[:3] == [Fraction(1, 5), Fraction(1, 5), Fraction(1, 6)]


def test_expect_first_matches_closed_form():
    closed = ClosedFormService()
    for r in (2, 3):
        for dist in random_distributions(r, 5, seed=r):
            for rs in run_specs(r):
                assert service.expect_j(dist, rs, 1) == closed.expect_first(dist, rs)


def test_fair_coin_both_letters():
    coin = AlphabetDistribution.uniform(2)
    assert service.expect_j(coin, RunSpec.uniform(2, 2), 2) == 9
    assert service.expect_j(coin, RunSpec.uniform(1, 2), 2) == 3


def test_coupon_collector_die(fair_die):
    assert service.expect_j(fair_die, RunSpec.uniform(1, 6), 6) == Fraction(147, 10)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_weighted_sum_matches_subset_sum(r):
    specs = run_specs(r) if r < 4 else [RunSpec.uniform(h, r) for h in (1, 2, 3)]
    for dist in random_distributions(r, 3, seed=10 + r):
        for rs in specs:
            for j in range(1, r + 1):
                assert service.expect_j(dist, rs, j) == service.expect_j_by_subsets(dist, rs, j)


def test_expect_all_matches_expect_j():
    for dist in random_distributions(3, 4, seed=21):
        for rs in run_specs(3):
            assert service.expect_all(dist, rs) == service.expect_j(dist, rs, 3)


def test_expectation_increases_with_j():
    dist = parse_distribution("1/2,1/4,1/8,1/8")
    rs = RunSpec.of([2, 3, 1, 2])
    values = [service.expect_j(dist, rs, j) for j in range(1, 5)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_harmonic_numbers():
    assert harmonic(1) == 1
    assert harmonic(6) == Fraction(49, 20)
    with pytest.raises(ValueError):
        harmonic(0)


@pytest.mark.parametrize("r", range(1, 31))
def test_harmonic_alternating_identity(r):
    assert harmonic_alternating(r) == harmonic(r)


@pytest.mark.parametrize("r", range(2, 7))
@pytest.mark.parametrize("h", range(1, 5))
def test_equiprobable_all_letters(r, h):
    dist = AlphabetDistribution.uniform(r)
    expected = Fraction(r * (r ** h - 1), r - 1) * harmonic(r)
    assert service.expect_all(dist, RunSpec.uniform(h, r)) == expected
    assert OperatorService.expect_all_uniform(r, h) == expected


def test_fair_die_all_triples():
    assert OperatorService.expect_all_uniform(6, 3) == Fraction(6321, 10)


def test_subset_guard():
    small = OperatorService(load_settings(max_operator_r=3))
    dist = AlphabetDistribution.uniform(4)
    rs = RunSpec.uniform(2, 4)
    with pytest.raises(OperatorLimitError):
        small.expect_j(dist, rs, 1)
    with pytest.raises(OperatorLimitError):
        small.expect_all(dist, rs)
    assert small.expect_j(dist, rs, 1, allow_large=True) == 5


def test_subset_guard_lifted_by_settings(caplog):
    lifted = OperatorService(load_settings(max_operator_r=3, allow_large=True))
    dist = AlphabetDistribution.uniform(4)
    rs = RunSpec.uniform(2, 4)
    with caplog.at_level("WARNING"):
        assert lifted.expect_j(dist, rs, 1) == 5
        assert lifted.expect_all(dist, rs) == OperatorService.expect_all_uniform(4, 2)
    assert "Subset guard overridden for r=4" in caplog.text
