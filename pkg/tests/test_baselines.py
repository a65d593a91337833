import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import app, brute_force, cap, ms, small_instance
from swarm_alloc.baselines import (
    ExhaustiveSearch,
    Offer,
    candidate_count,
    centralised_exhaustive,
    collect_offers,
    first_fit,
)
from swarm_alloc.domain import Allocation, Failure, Kind, Location, Outcome, validate_allocation


def test_collect_offers_orders_by_capacity_then_microservice():
    a = app(0, ms(0), ms(1))
    offers = collect_offers(a, [cap(2), cap(0), cap(1)])
    assert [(o.capacity_id, o.microservice_id) for o in offers] == [(c, m) for c in range(3) for m in range(2)]
    assert all(o.feasible for o in offers)


def test_collect_offers_empty_and_occupied_edges():
    assert collect_offers(app(0, ms(0, loc=Location.US)), [cap(0, loc=Location.EU)]) == []
    edge = cap(0, kind=Kind.EDGE, occupied_by=9)
    assert collect_offers(app(0, ms(0)), [edge, cap(1)]) == [Offer(1, 0)]


def test_single_choice():
    result = centralised_exhaustive(app(0, ms(0)), [cap(0)])
    assert isinstance(result, Allocation) and result.assignments == {0: 0}


def test_cheap_small_and_expensive_large():
    # A is cheap and fits one microservice, B is expensive and fits both
    a = app(0, ms(0, cpu=2), ms(1, cpu=2))
    caps = [cap(0, quota=(2, 16, 16), price=0.1), cap(1, quota=(8, 16, 16), price=0.9)]
    result = centralised_exhaustive(a, caps)
    expected = brute_force(a, caps)
    assert result.total_cost == pytest.approx(expected[0], abs=1e-12)
    assert sorted(result.assignments.values()) == [0, 1]


def test_ties_resolve_to_lexicographically_smallest_assignment():
    a = app(0, ms(0), ms(1))
    caps = [cap(i) for i in range(3)]
    assert centralised_exhaustive(a, caps).assignments == {0: 0, 1: 0}


@pytest.mark.parametrize("m,k", [(1, 4), (2, 3), (3, 3), (4, 2)])
def test_counts_every_candidate_when_all_fit(m, k):
    a = app(0, *[ms(i) for i in range(m)])
    search = ExhaustiveSearch(a, [cap(j) for j in range(k)])
    assert isinstance(search.run(), Allocation)
    assert search.candidates == k**m == candidate_count(a, [cap(j) for j in range(k)])


def test_budget_exceeded_is_reported_up_front():
    a = app(0, *[ms(i) for i in range(3)])
    result = centralised_exhaustive(a, [cap(j) for j in range(5)], budget=100)
    assert isinstance(result, Failure) and result.reason is Outcome.ENUMERATION_BUDGET_EXCEEDED


def test_no_offer_and_no_joint_fit_fail():
    none = centralised_exhaustive(app(0, ms(0, loc=Location.US)), [cap(0)])
    assert none.reason is Outcome.NO_VALID_ALLOCATION and none.microservice_ids == (0,)
    tight = centralised_exhaustive(app(0, ms(0, cpu=2), ms(1, cpu=2)), [cap(0, quota=(3, 16, 16))])
    assert tight.reason is Outcome.NO_VALID_ALLOCATION


def test_expired_deadline_times_out():
    a = app(0, *[ms(i) for i in range(5)])
    result = centralised_exhaustive(a, [cap(j) for j in range(8)], deadline=time.perf_counter() - 1)
    assert isinstance(result, Failure) and result.reason is Outcome.TIMED_OUT


def test_first_fit_single_microservice_matches_exhaustive():
    a = app(0, ms(0))
    caps = [cap(0, price=0.9), cap(1, price=0.1)]
    assert first_fit(a, caps).assignments == {0: 0}
    caps = [cap(1, price=0.1)]
    assert first_fit(a, caps).assignments == centralised_exhaustive(a, caps).assignments


def test_first_fit_fails_without_backtracking():
    # ms0 fits A or B, ms1 fits only A, A hosts one of them
    a = app(0, ms(0, cpu=2), ms(1, cpu=2, loc=Location.EU))
    caps = [cap(0, quota=(2, 16, 16), loc=Location.EU), cap(1, quota=(8, 16, 16), loc=Location.US)]
    ff = first_fit(a, caps)
    assert isinstance(ff, Failure) and ff.reason is Outcome.NO_VALID_ALLOCATION and ff.microservice_ids == (1,)
    assert centralised_exhaustive(a, caps).assignments == {0: 1, 1: 0}


def test_first_fit_honours_tentative_reservations():
    a = app(0, ms(0, cpu=2), ms(1, cpu=2))
    result = first_fit(a, [cap(0, quota=(3, 16, 16)), cap(1)])
    assert result.assignments == {0: 0, 1: 1}


def test_allocators_leave_capacities_untouched():
    a, caps = small_instance(3)
    before = [(c.remaining, c.occupied_by) for c in caps]
    centralised_exhaustive(a, caps)
    first_fit(a, caps)
    assert [(c.remaining, c.occupied_by) for c in caps] == before


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_instances_against_brute_force(i):
    a, caps = small_instance(i, base=31)
    ex = centralised_exhaustive(a, caps)
    ff = first_fit(a, caps)
    oracle = brute_force(a, caps)
    if oracle is None:
        assert isinstance(ex, Failure) and isinstance(ff, Failure)
        return
    assert isinstance(ex, Allocation)
    assert validate_allocation(ex, a, caps)
    assert ex.total_cost == pytest.approx(oracle[0], abs=1e-9)
    if isinstance(ff, Allocation):
        assert validate_allocation(ff, a, caps)
        assert ff.total_cost >= ex.total_cost - 1e-12


def test_pre_occupied_capacities_are_respected():
    a = app(5, ms(0), ms(1))
    caps = [cap(0, kind=Kind.EDGE, occupied_by=4, price=0.05), cap(1, remaining=(1, 16, 16)), cap(2, price=0.9)]
    result = centralised_exhaustive(a, caps)
    assert 0 not in result.assignments.values()
    assert list(result.assignments.values()).count(1) <= 1
    assert brute_force(a, caps)[0] == pytest.approx(result.total_cost, abs=1e-12)
