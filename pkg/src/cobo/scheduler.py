"""Budget-aware participation schedule.

Agents with smaller evaluation budgets sample less frequently instead of
dropping out early: agent i is active at iteration t when t is a multiple
of its interval tau_i = floor(B_max / B_i) and it still has budget left.
Budgets count main-loop evaluations only; initial designs are separate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class BudgetSchedule:
    initial: np.ndarray    # per-agent budgets B_i as given
    remaining: np.ndarray  # decremented as evaluations happen
    interval: np.ndarray   # tau_i; 0 marks a zero-budget agent (never active)
    b_max: int             # max budget; the default horizon T

    @property
    def used(self) -> np.ndarray:
        return self.initial - self.remaining


def init_schedule(budgets) -> BudgetSchedule:
    budgets = np.asarray(budgets, dtype=int)
    if budgets.ndim != 1 or budgets.size == 0:
        raise ValueError("init_schedule needs a non-empty 1-D budget vector")
    if np.any(budgets < 0):
        raise ValueError("budgets must be >= 0")
    b_max = int(budgets.max())
    if b_max == 0:
        raise ValueError("at least one agent needs a positive budget")
    interval = np.zeros_like(budgets)
    positive = budgets > 0
    interval[positive] = b_max // budgets[positive]
    return BudgetSchedule(
        initial=budgets.copy(),
        remaining=budgets.copy(),
        interval=interval,
        b_max=b_max,
    )


def is_active(schedule: BudgetSchedule, agent: int, t: int) -> bool:
    """Active iff t is a multiple of tau_i and budget remains."""
    if schedule.initial[agent] == 0:
        return False
    if schedule.remaining[agent] <= 0:
        return False
    return t % int(schedule.interval[agent]) == 0


def active_set(schedule: BudgetSchedule, t: int) -> list[int]:
    return [i for i in range(schedule.initial.size) if is_active(schedule, i, t)]


def record_evaluation(schedule: BudgetSchedule, agent: int) -> None:
    """Spend one evaluation; spending past zero is a scheduling bug."""
    if schedule.remaining[agent] <= 0:
        raise RuntimeError(f"agent {agent} has no budget left")
    schedule.remaining[agent] -= 1


def any_remaining(schedule: BudgetSchedule) -> bool:
    return bool(np.any(schedule.remaining > 0))
