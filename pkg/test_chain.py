"""
Tests for the absorbing-chain route: construction, exact solves and CDFs.
"""

from fractions import Fraction

import pytest

from conftest import random_distributions, run_specs
from models.chain import ABSORBED, AbsorbingChain, ChainInvariantError, ChainState, Transition
from models.distribution import RunSpec, parse_distribution
from services.chain_service import ChainService, next_context
from services.closed_form_service import ClosedFormService
from services.exact_solver import ExactLinearSolver, SingularSystemError
from services.operator_service import OperatorService

chain_service = ChainService()
closed_form = ClosedFormService()
operator = OperatorService()


def test_two_letter_triple_run_chain(fair_coin):
    chain = chain_service.build_run_chain(fair_coin, RunSpec.uniform(3, 2), 1)
    assert chain.size == 5
    assert [state.label() for state in chain.states] == ["", "1", "2", "11", "22"]
    assert chain.size == ChainService.state_bound(RunSpec.uniform(3, 2), 1)


def test_single_letter_runs_absorb_at_once(fair_die):
    chain = chain_service.build_run_chain(fair_die, RunSpec.uniform(1, 6), 1)
    assert chain.size == 1
    assert all(t.target == ABSORBED for t in chain.transitions[0])


def test_next_context_suppresses_completed_letters():
    lengths = (2, 2)
    state, done = next_context(ChainState(), 0, lengths)
    assert state == ChainState(frozenset(), 0, 1) and not done
    state, done = next_context(state, 0, lengths)
    assert state == ChainState(frozenset({0}), 0, 0) and done
    assert state.label() == "{1}1*"
    state, done = next_context(state, 0, lengths)
    assert state == ChainState(frozenset({0}), 0, 0) and not done
    state, done = next_context(state, 1, lengths)
    assert state.label() == "{1}2" and not done


def test_fair_die_moments(fair_die):
    moments = chain_service.moments(fair_die, RunSpec.uniform(2, 6), 1)
    assert moments.expectation == 7
    assert moments.variance == 30
    assert chain_service.moments(fair_die, RunSpec.uniform(3, 6), 1).expectation == 43


def test_fair_coin_moments(fair_coin):
    moments = chain_service.moments(fair_coin, RunSpec.uniform(1, 2), 1)
    assert (moments.expectation, moments.variance) == (1, 0)
    assert chain_service.moments(fair_coin, RunSpec.uniform(2, 2), 2).expectation == 9


def test_waiting_cdf(fair_coin):
    chain = chain_service.build_run_chain(fair_coin, RunSpec.uniform(2, 2), 1)
    assert chain_service.chain_waiting_cdf(chain, 0) == 0
    assert chain_service.chain_waiting_cdf(chain, 1) == 0
    assert chain_service.chain_waiting_cdf(chain, 2) == Fraction(1, 2)
    assert chain_service.chain_waiting_cdf(chain, 3) == Fraction(3, 4)
    assert chain_service.chain_waiting_cdfs(chain, 3) == [0, 0, Fraction(1, 2), Fraction(3, 4)]
    with pytest.raises(ValueError):
        chain_service.chain_waiting_cdf(chain, -1)


def test_absorption_within_matches_cdf():
    dist = parse_distribution("1/2,1/3,1/6")
    chain = chain_service.build_run_chain(dist, RunSpec.of([2, 1, 3]), 2)
    for steps in range(6):
        assert chain_service.absorption_within(chain, steps)[chain.start] == \
            chain_service.chain_waiting_cdf(chain, steps)


@pytest.mark.parametrize("dist_text, runs, j", [
    ("1/2,1/2", [2, 2], 1),
    ("1/2,1/3,1/6", [2, 1, 3], 2),
    ("1/2,1/3,1/6", [2, 2, 2], 3),
])
def test_waiting_cdf_is_monotone_and_tends_to_one(dist_text, runs, j):
    chain = chain_service.build_run_chain(parse_distribution(dist_text), RunSpec.of(runs), j)
    cdfs = chain_service.chain_waiting_cdfs(chain, 800)
    assert all(0 <= value <= 1 for value in cdfs)
    assert all(a <= b for a, b in zip(cdfs, cdfs[1:]))
    assert 1 - cdfs[-1] < Fraction(1, 10 ** 6)


@pytest.mark.parametrize("r", [2, 3])
def test_route_agreement_expectation(r):
    for dist in random_distributions(r, 10, seed=100 + r):
        for rs in run_specs(r):
            for j in range(1, r + 1):
                chain = chain_service.build_run_chain(dist, rs, j)
                assert chain.size <= ChainService.state_bound(rs, j)
                expectation = chain_service.chain_moments(chain).expectation
                assert operator.expect_j(dist, rs, j) == expectation
                if j == r:
                    assert operator.expect_all(dist, rs) == expectation


@pytest.mark.parametrize("r", [2, 3])
def test_route_agreement_variance(r):
    for dist in random_distributions(r, 10, seed=200 + r):
        for rs in run_specs(r):
            assert chain_service.moments(dist, rs, 1).variance == closed_form.variance_first(dist, rs)


def test_letter_chain_matches_letter_expectation():
    dist = parse_distribution("1/2,1/3,1/6")
    rs = RunSpec.of([3, 2, 2])
    for letter in range(3):
        chain = chain_service.build_letter_chain(dist, rs, letter)
        assert chain.size == rs.lengths[letter]
        assert chain_service.chain_moments(chain).expectation == \
            closed_form.expect_letter(dist, rs, letter)


def test_state_bound_counts_contexts():
    assert ChainService.state_bound(RunSpec.uniform(1, 4), 1) == 1
    # {} with 2+2 contexts, {1} and {2} with 1+2 contexts each
    assert ChainService.state_bound(RunSpec.uniform(3, 2), 2) == 11


def test_dump_format(fair_coin):
    chain = chain_service.build_run_chain(fair_coin, RunSpec.uniform(1, 2), 1)
    assert chain_service.dump_chain(chain).splitlines() == [
        "# states=1 start=0 j=1",
        "# 0 (start)",
        "0 1 1/2 A",
        "0 2 1/2 A",
    ]


def test_dump_lists_every_transition(fair_coin):
    chain = chain_service.build_run_chain(fair_coin, RunSpec.uniform(3, 2), 1)
    body = [line for line in chain_service.dump_chain(chain).splitlines() if not line.startswith("#")]
    assert len(body) == 10
    assert "3 1 1/2 A" in body


def test_singular_solver():
    with pytest.raises(SingularSystemError):
        ExactLinearSolver([{0: Fraction(1), 1: Fraction(1)}, {0: Fraction(2), 1: Fraction(2)}], 2)


def test_solver_solves_small_system():
    solver = ExactLinearSolver([{0: Fraction(2), 1: Fraction(1)}, {0: Fraction(1), 1: Fraction(3)}], 2)
    assert solver.solve([Fraction(3), Fraction(4)]) == [1, 1]
    assert solver.solve([Fraction(1), Fraction(3)]) == [0, 1]


def test_row_sum_invariant():
    with pytest.raises(ChainInvariantError):
        AbsorbingChain(
            states=(ChainState(),),
            transitions=((Transition(0, Fraction(1, 2), ABSORBED),),),
            start=0,
            weights=(1, 1),
            weight_total=2,
        )


def test_chain_must_absorb():
    with pytest.raises(ChainInvariantError):
        AbsorbingChain(
            states=(ChainState(),),
            transitions=((Transition(0, Fraction(1, 2), 0), Transition(1, Fraction(1, 2), 0)),),
            start=0,
            weights=(1, 1),
            weight_total=2,
        )
