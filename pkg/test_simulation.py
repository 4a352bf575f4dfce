"""
Tests for the seeded Monte Carlo route.
"""

import pytest

from config import load_settings
from models.distribution import AlphabetDistribution, RunSpec
from services.simulation_service import SimulationService

service = SimulationService(load_settings(simulation_block=1000))


def test_single_letter_runs_end_after_one_letter(fair_die):
    summary = service.simulate_waiting(fair_die, RunSpec.uniform(1, 6), 1, trials=500, seed=3)
    assert summary.mean == 1.0
    assert summary.variance == 0.0
    assert summary.blocks == 1


def test_same_seed_same_summary(fair_coin):
    rs = RunSpec.uniform(2, 2)
    first = service.simulate_waiting(fair_coin, rs, 2, trials=2500, seed=42)
    second = service.simulate_waiting(fair_coin, rs, 2, trials=2500, seed=42)
    assert first == second
    assert first.blocks == 3


def test_threads_do_not_change_results(fair_coin):
    rs = RunSpec.uniform(3, 2)
    serial = service.simulate_waiting(fair_coin, rs, 1, trials=5000, seed=9)
    threaded = service.simulate_waiting(fair_coin, rs, 1, trials=5000, seed=9, threads=4)
    assert serial == threaded


def test_seed_is_masked_to_64_bits(fair_coin):
    rs = RunSpec.uniform(2, 2)
    wide = service.simulate_waiting(fair_coin, rs, 1, trials=300, seed=(1 << 64) + 5)
    narrow = service.simulate_waiting(fair_coin, rs, 1, trials=300, seed=5)
    assert wide == narrow


def test_coupon_collector_coin(fair_coin):
    summary = service.simulate_waiting(fair_coin, RunSpec.uniform(1, 2), 2, trials=20000, seed=1)
    assert abs(summary.mean - 3) < 5 * summary.standard_error


def test_fair_coin_triple_run(fair_coin):
    summary = service.simulate_waiting(fair_coin, RunSpec.uniform(3, 2), 1, trials=50000, seed=11)
    assert abs(summary.mean - 7) < 5 * summary.standard_error
    assert abs(summary.variance - 22) < 0.1 * 22


def test_rejects_empty_run(fair_coin):
    with pytest.raises(ValueError):
        service.simulate_waiting(fair_coin, RunSpec.uniform(2, 2), 1, trials=0, seed=1)


@pytest.mark.slow
def test_fair_die_pairs_million_trials():
    default = SimulationService(load_settings())
    summary = default.simulate_waiting(
        AlphabetDistribution.uniform(6), RunSpec.uniform(2, 6), 1, trials=1_000_000, seed=20240101,
    )
    assert summary.blocks == 10
    assert abs(summary.mean - 7) < 5 * summary.standard_error
    assert abs(summary.variance - 30) < 0.1 * 30
