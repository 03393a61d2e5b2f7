"""IT room power and air temperatures.

Steady-state per step: every watt of IT electricity becomes heat.  Server
fans follow a cubic affinity law on a flow ratio that ramps linearly from
0.3 at 18 degC inlet to 1.0 at 27 degC, so raising the supply setpoint
trades fan power against chiller efficiency.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import DataCenterConfig, ServerSpec

AIR_SPECIFIC_HEAT = 1005.0  # J/(kg*K), dry air, no altitude correction

_FAN_RAMP_LOW = 18.0   # degC, flow ratio 0.3
_FAN_RAMP_SPAN = 9.0   # degC to reach flow ratio 1.0


@dataclass(frozen=True)
class ItResult:
    """Electrical power and air temperatures for one operating point."""

    it_power: float                  # W, cpu + fan
    cpu_power: float                 # W
    fan_power: float                 # W
    inlet_temps: tuple[float, ...]   # degC per cabinet
    outlet_temps: tuple[float, ...]  # degC per cabinet
    return_temp: float               # degC, heat-weighted mean outlet
    crac_flow_ratio: float           # heat-weighted mean server fan ratio, in (0, 1]


@dataclass(frozen=True)
class TemperatureGrid:
    """Row-major inlet/outlet temperature grids over the room layout."""

    rows: int
    cols: int
    inlet: tuple[float, ...]
    outlet: tuple[float, ...]


def fan_ratio(t_inlet: float, spec: ServerSpec) -> float:
    """Server fan flow ratio at the given inlet temperature.

    Linear ramp 0.3 -> 1.0 over 18..27 degC, clamped to
    [spec.fan_min_ratio, 1.0]; monotone nondecreasing in t_inlet.
    """
    ratio = 0.3 + 0.7 * (t_inlet - _FAN_RAMP_LOW) / _FAN_RAMP_SPAN
    if ratio < spec.fan_min_ratio:
        return spec.fan_min_ratio
    return min(ratio, 1.0)


def server_power(u: float, t_inlet: float, spec: ServerSpec) -> tuple[float, float]:
    """(cpu, fan) power in watts for one server at utilization ``u``.

    CPU power is affine in u; fan power is cubic in the flow ratio.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"utilization {u} outside [0, 1]")
    cpu = spec.idle_power + (spec.full_power - spec.idle_power) * u
    fan = spec.fan_ref_power * fan_ratio(t_inlet, spec) ** 3
    return cpu, fan


def room_step(cfg: DataCenterConfig, setpoint: float, u: float) -> ItResult:
    """Room-level power and temperatures at one (setpoint, utilization) point.

    Utilization applies uniformly to all servers.  Per cabinet: inlet =
    setpoint + static offset, airflow = fan_ratio * airflow_ref, and the
    outlet rise is Q / (m_dot * cp).  No recirculation between cabinets.
    """
    hvac = cfg.hvac
    if not hvac.setpoint_min <= setpoint <= hvac.setpoint_max:
        raise ValueError(f"setpoint {setpoint} outside "
                         f"[{hvac.setpoint_min}, {hvac.setpoint_max}]")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"utilization {u} outside [0, 1]")

    spec = cfg.server
    inlet_temps: list[float] = []
    outlet_temps: list[float] = []
    cpu_total = 0.0
    fan_total = 0.0
    q_weighted_outlet = 0.0
    q_weighted_ratio = 0.0
    q_total = 0.0

    cpu_one = spec.idle_power + (spec.full_power - spec.idle_power) * u
    for cab in cfg.room.cabinets:
        t_inlet = setpoint + cab.inlet_offset
        ratio = fan_ratio(t_inlet, spec)
        fan_cab = cab.server_count * (spec.fan_ref_power * ratio ** 3)
        cpu_cab = cab.server_count * cpu_one
        q_cab = cpu_cab + fan_cab
        m_dot = ratio * cab.airflow_ref
        t_outlet = t_inlet + q_cab / (m_dot * AIR_SPECIFIC_HEAT)

        inlet_temps.append(t_inlet)
        outlet_temps.append(t_outlet)
        cpu_total += cpu_cab
        fan_total += fan_cab
        q_total += q_cab
        q_weighted_outlet += q_cab * t_outlet
        q_weighted_ratio += q_cab * ratio

    # cpu + fan is the normative total; q_total only weights the air mix.
    it_power = cpu_total + fan_total
    return ItResult(
        it_power=it_power,
        cpu_power=cpu_total,
        fan_power=fan_total,
        inlet_temps=tuple(inlet_temps),
        outlet_temps=tuple(outlet_temps),
        return_temp=q_weighted_outlet / q_total,
        crac_flow_ratio=q_weighted_ratio / q_total,
    )


def hotspot_grid(cfg: DataCenterConfig, result: ItResult) -> TemperatureGrid:
    """Reshape the per-cabinet temperature lists into row-major layout grids."""
    rows, cols = cfg.room.rows, cfg.room.cabinets_per_row
    if len(result.inlet_temps) != rows * cols:
        raise ValueError(f"result has {len(result.inlet_temps)} cabinets, "
                         f"layout expects {rows}x{cols}")
    return TemperatureGrid(rows=rows, cols=cols,
                           inlet=result.inlet_temps, outlet=result.outlet_temps)
