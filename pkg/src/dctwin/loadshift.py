"""Carbon-aware flexible load shifting with a deadline queue.

A bounded fraction of each step's base utilization can be deferred into a
queue; queued work is released voluntarily (earliest deadline first) or
force-executed when its deadline arrives.  Forced work that does not fit
under the utilization capacity is dropped and penalized, never errored, so
every action sequence stays valid.

Normative ordering inside a step: the agent's action runs first, then
deadline enforcement against the post-action utilization (a same-step store
cannot dodge a deadline).
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import LoadShiftSpec

SHIFT_ACTIONS = ("store", "passthrough", "release")


@dataclass(frozen=True)
class ShiftQueue:
    """Deferred work entries (amount, absolute deadline step), deadline-ascending."""

    entries: tuple[tuple[float, int], ...] = ()

    @property
    def total(self) -> float:
        return sum(amount for amount, _ in self.entries)


@dataclass(frozen=True)
class ShiftOutcome:
    effective_util: float   # in [0, util_capacity]
    new_queue: ShiftQueue
    forced: float           # executed because a deadline arrived
    dropped: float          # lost to capacity clipping at forced execution
    penalty: float          # drop_penalty_weight * dropped


def _take(entries: tuple[tuple[float, int], ...], amount: float):
    """Remove up to ``amount`` of work from the queue front (EDF); returns
    (taken, remaining_entries)."""
    taken = 0.0
    remaining = list(entries)
    while remaining and taken < amount:
        entry_amount, deadline = remaining[0]
        want = amount - taken
        if entry_amount <= want:
            taken += entry_amount
            remaining.pop(0)
        else:
            remaining[0] = (entry_amount - want, deadline)
            taken = amount
    return taken, tuple(remaining)


def apply_action(queue: ShiftQueue, base_util: float, action: str, t: int,
                 spec: LoadShiftSpec) -> ShiftOutcome:
    """One scheduler step at absolute step index ``t``."""
    if action not in SHIFT_ACTIONS:
        raise ValueError(f"unknown load-shift action {action!r}")
    if not 0.0 <= base_util <= 1.0:
        raise ValueError(f"base utilization {base_util} outside [0, 1]")

    cap = spec.util_capacity
    entries = queue.entries
    util = base_util

    if action == "store":
        shifted = spec.shiftable_fraction * base_util
        if shifted > 0.0:
            util = base_util - shifted
            entries = entries + ((shifted, t + spec.deadline_steps),)
            if len(entries) > 1 and entries[-2][1] > entries[-1][1]:
                entries = tuple(sorted(entries, key=lambda e: e[1]))
    elif action == "release":
        headroom = max(0.0, cap - util)
        released, entries = _take(entries, headroom)
        util += released

    # Deadline phase: force-execute overdue work into whatever headroom the
    # post-action utilization leaves; the overflow is dropped.
    due_total = 0.0
    kept = []
    for amount, deadline in entries:
        if deadline <= t:
            due_total += amount
        else:
            kept.append((amount, deadline))
    forced = 0.0
    dropped = 0.0
    if due_total > 0.0:
        headroom = max(0.0, cap - util)
        forced = min(due_total, headroom)
        dropped = due_total - forced
        util += forced
    entries = tuple(kept)

    effective = min(max(util, 0.0), cap)
    return ShiftOutcome(
        effective_util=effective,
        new_queue=ShiftQueue(entries=entries),
        forced=forced,
        dropped=dropped,
        penalty=spec.drop_penalty_weight * dropped,
    )


def flush(queue: ShiftQueue, base_util_remaining: list[float],
          spec: LoadShiftSpec) -> tuple[list[float], float]:
    """End-of-episode settlement: greedily pack all queued work (EDF) into the
    headroom of the given settlement steps; whatever does not fit is dropped.

    Returns (per-step forced additions, total dropped).
    """
    entries = queue.entries
    forced_per_step: list[float] = []
    for base in base_util_remaining:
        headroom = max(0.0, spec.util_capacity - base)
        taken, entries = _take(entries, headroom)
        forced_per_step.append(taken)
    dropped = sum(amount for amount, _ in entries)
    return forced_per_step, dropped
