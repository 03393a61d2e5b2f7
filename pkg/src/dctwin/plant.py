"""Cooling plant electrical power: CRAC fans, chiller, cooling tower, pumps.

A single lumped plant sized to always meet the load.  The chiller COP is a
clamped linear function of ambient temperature and supply setpoint; tower
fan power is linear in rejected condenser heat (dry-bulb only).
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import HvacSpec


@dataclass(frozen=True)
class HvacResult:
    """Plant power breakdown for one step; total is the sum of the four parts."""

    crac_fan_power: float       # W
    chiller_power: float        # W
    cooling_tower_power: float  # W
    pump_power: float           # W
    total: float                # W
    cop_effective: float


def crac_fan_power(flow_ratio: float, spec: HvacSpec) -> float:
    """CRAC fan power at a flow ratio in [0, 1] (cubic affinity law)."""
    if not 0.0 <= flow_ratio <= 1.0:
        raise ValueError(f"flow ratio {flow_ratio} outside [0, 1]")
    return spec.crac_ref_power * flow_ratio ** 3


def chiller_cop(t_ambient: float, setpoint: float, spec: HvacSpec) -> float:
    """Effective chiller COP, clamped to [cop_min, cop_max].

    Falls with ambient temperature, rises with supply setpoint; monotone in
    both except where the clamp is active.
    """
    cop = (spec.cop_nominal
           - spec.cop_ambient_slope * (t_ambient - spec.ambient_ref)
           + spec.cop_setpoint_slope * (setpoint - spec.setpoint_ref))
    if cop < spec.cop_min:
        return spec.cop_min
    return min(cop, spec.cop_max)


def plant_step(q_it: float, crac_flow_ratio: float, t_ambient: float,
               setpoint: float, spec: HvacSpec) -> HvacResult:
    """Plant power needed to reject ``q_it`` watts of IT heat.

    CRAC fan heat joins the chiller load; the tower rejects load plus
    chiller electrical input; pumps draw a fixed power whenever loaded.
    """
    if q_it < 0:
        raise ValueError(f"IT heat load {q_it} must be >= 0")
    crac = crac_fan_power(crac_flow_ratio, spec)
    q_chiller = q_it + crac
    cop = chiller_cop(t_ambient, setpoint, spec)
    chiller = q_chiller / cop
    tower = max(0.0, spec.cooling_tower_ref_power
                * (q_chiller + chiller) / spec.cooling_tower_ref_load)
    pump = spec.pump_power if q_chiller > 0 else 0.0
    return HvacResult(
        crac_fan_power=crac,
        chiller_power=chiller,
        cooling_tower_power=tower,
        pump_power=pump,
        total=crac + chiller + tower + pump,
        cop_effective=cop,
    )
