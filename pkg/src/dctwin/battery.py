"""Auxiliary battery: bang-bang charge/idle/discharge with hard SoC bounds.

The rate limit applies to grid-side energy per step.  Discharge offsets
facility draw only -- no grid export.  No self-discharge or degradation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import BatterySpec

BATTERY_ACTIONS = ("charge", "idle", "discharge")


@dataclass(frozen=True)
class BatteryState:
    soc: float  # kWh, in [0, capacity]


@dataclass(frozen=True)
class BatteryOutcome:
    """Result of one dispatch step.

    grid_energy_delta is in kWh: positive = extra grid draw while charging,
    negative = grid draw offset by discharge, 0 when idle.  ``clipped`` is
    set when a capacity, SoC, or facility-load cap bound the action.
    """

    new_soc: float
    grid_energy_delta: float
    clipped: bool


def battery_step(state: BatteryState, action: str, dc_load_energy: float,
                 dt: float, spec: BatterySpec) -> BatteryOutcome:
    """Advance the battery one step of ``dt`` hours against a facility load."""
    if action not in BATTERY_ACTIONS:
        raise ValueError(f"unknown battery action {action!r}")
    if dc_load_energy < 0:
        raise ValueError("facility load energy must be >= 0")
    if dt <= 0:
        raise ValueError("dt must be > 0")

    if action == "idle":
        return BatteryOutcome(new_soc=state.soc, grid_energy_delta=0.0, clipped=False)

    rate_energy = spec.max_rate * dt  # kWh of grid-side energy at full rate

    if action == "charge":
        headroom = spec.capacity - state.soc
        stored = min(rate_energy * spec.charge_eff, headroom)
        return BatteryOutcome(
            new_soc=state.soc + stored,
            grid_energy_delta=stored / spec.charge_eff,
            clipped=headroom < rate_energy * spec.charge_eff,
        )

    # discharge: max_rate caps delivered energy, SoC caps withdrawal, and
    # delivery never exceeds the facility load (no export).
    withdraw_limit = rate_energy / spec.discharge_eff
    withdrawable = min(state.soc, withdraw_limit)
    deliverable = withdrawable * spec.discharge_eff
    if deliverable > dc_load_energy:
        delivered = dc_load_energy
        withdrawn = delivered / spec.discharge_eff
    else:
        delivered = deliverable
        withdrawn = withdrawable  # exact, avoids a divide round-trip past soc
    return BatteryOutcome(
        new_soc=max(0.0, state.soc - withdrawn),  # guard sub-ulp rounding
        grid_energy_delta=-delivered,
        clipped=state.soc < withdraw_limit or deliverable > dc_load_energy,
    )
