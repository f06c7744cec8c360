"""Budget-aware participation schedule."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobo.scheduler import (
    active_set,
    any_remaining,
    init_schedule,
    is_active,
    record_evaluation,
)


def test_intervals_for_mixed_budgets():
    sched = init_schedule([50, 25, 25, 50, 25])
    assert sched.b_max == 50
    assert list(sched.interval) == [1, 2, 2, 1, 2]


def test_intervals_floor_the_ratio():
    sched = init_schedule([30, 10, 20, 20])
    assert sched.b_max == 30
    assert list(sched.interval) == [1, 3, 1, 1]


def test_equal_budgets_are_always_due():
    sched = init_schedule([20, 20, 20])
    assert list(sched.interval) == [1, 1, 1]
    assert active_set(sched, 0) == [0, 1, 2]
    assert active_set(sched, 13) == [0, 1, 2]


def test_activity_rules():
    sched = init_schedule([4, 2])
    # tau = [1, 2]: agent 1 samples on even iterations only
    assert is_active(sched, 1, 0)
    assert not is_active(sched, 1, 3)
    assert is_active(sched, 1, 2)
    # an exhausted agent is never active even when due
    sched.remaining[1] = 0
    assert not is_active(sched, 1, 2)


def test_zero_budget_agent_is_inert():
    sched = init_schedule([5, 0])
    assert sched.interval[1] == 0
    for t in range(10):
        assert not is_active(sched, 1, t)
    assert active_set(sched, 0) == [0]


def test_all_zero_budgets_rejected():
    with pytest.raises(ValueError):
        init_schedule([0, 0, 0])
    with pytest.raises(ValueError):
        init_schedule([])
    with pytest.raises(ValueError):
        init_schedule([5, -1])


def test_interval_two_agent_spends_exactly_its_budget():
    # B = [50, 25], T = b_max = 50: the slow agent samples at the 25 even
    # iterations, exactly its budget.
    sched = init_schedule([50, 25])
    count = 0
    for t in range(50):
        if is_active(sched, 1, t):
            record_evaluation(sched, 1)
            count += 1
    assert count == 25
    assert sched.remaining[1] == 0


def test_interval_three_agent_spends_exactly_its_budget():
    sched = init_schedule([30, 10])
    count = 0
    for t in range(30):
        if is_active(sched, 1, t):
            record_evaluation(sched, 1)
            count += 1
    assert count == 10
    assert sched.used[1] == 10


def test_cannot_spend_past_zero():
    sched = init_schedule([1, 5])
    record_evaluation(sched, 0)
    with pytest.raises(RuntimeError):
        record_evaluation(sched, 0)


def test_any_remaining_tracks_exhaustion():
    sched = init_schedule([1, 1])
    assert any_remaining(sched)
    record_evaluation(sched, 0)
    record_evaluation(sched, 1)
    assert not any_remaining(sched)


@given(
    budgets=st.lists(st.integers(0, 40), min_size=1, max_size=8).filter(
        lambda b: max(b) > 0
    ),
    horizon=st.integers(1, 120),
)
@settings(max_examples=80)
def test_schedule_never_exceeds_budgets(budgets, horizon):
    sched = init_schedule(budgets)
    for t in range(horizon):
        for i in active_set(sched, t):
            record_evaluation(sched, i)
    assert np.all(sched.used <= sched.initial)
    assert np.all(sched.remaining >= 0)
    # running to the full default horizon spends every budget exactly
    if horizon >= sched.b_max * max(
        int(v) for v in sched.interval[sched.initial > 0]
    ):
        assert np.all(sched.remaining[sched.initial > 0] == 0)
