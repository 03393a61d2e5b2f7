"""Multi-agent step/reset simulation environment.

Each step wires the subsystems in one fixed order: setpoint move, load
shift, IT room physics, cooling plant, battery dispatch, then carbon
accounting.  The three agents ("ls", "hvac", "bat") act simultaneously and
share one cooperative reward.  Everything is a pure function of the state,
so runs are bit-reproducible and instances are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import loadshift as ls_mod
from . import thermal
from .battery import BATTERY_ACTIONS, BatteryOutcome, BatteryState, battery_step
from .config import DataCenterConfig, validate_config
from .loadshift import SHIFT_ACTIONS, ShiftOutcome, ShiftQueue
from .plant import plant_step
from .traces import AlignedTraces

AGENTS = ("ls", "hvac", "bat")
HVAC_ACTIONS = ("dec", "hold", "inc")
OBS_SIZE = 18

_HVAC_DELTA = {"dec": -1.0, "hold": 0.0, "inc": 1.0}


class EnvError(ValueError):
    """Raised for invalid resets, bad actions, or stepping a finished episode."""


@dataclass(frozen=True)
class AgentActions:
    """One discrete action per agent channel."""

    ls: str = "passthrough"
    hvac: str = "hold"
    bat: str = "idle"


@dataclass(frozen=True)
class EpisodeAccumulator:
    """Running totals over an episode; grid energy is the headline total."""

    steps: int = 0
    total_energy_kwh: float = 0.0
    it_energy_kwh: float = 0.0
    hvac_energy_kwh: float = 0.0
    battery_charge_kwh: float = 0.0
    battery_discharge_kwh: float = 0.0
    carbon_kg: float = 0.0
    total_penalty: float = 0.0
    total_reward: float = 0.0
    work_offered: float = 0.0    # sum of base utilization
    work_executed: float = 0.0   # sum of effective utilization + settlement execution
    work_dropped: float = 0.0


@dataclass(frozen=True)
class SimState:
    """Complete episode state; ``step`` consumes one and returns the next."""

    cfg: DataCenterConfig
    traces: AlignedTraces
    t: int
    setpoint: float
    battery: BatteryState
    queue: ShiftQueue
    cumulative: EpisodeAccumulator
    rng_seed: int
    last_it_power_kw: float = 0.0
    last_total_power_kw: float = 0.0


@dataclass(frozen=True)
class StepResult:
    """Per-step breakdown returned alongside the new state."""

    it_power_kw: float
    hvac_power_kw: float
    grid_energy_kwh: float
    carbon_kg: float
    penalty: float
    rewards: dict[str, float]
    done: bool
    hotspot: thermal.TemperatureGrid
    shift: ShiftOutcome
    battery_outcome: BatteryOutcome


@dataclass(frozen=True)
class EpisodeReport:
    """Aggregated episode metrics (the benchmark's headline numbers)."""

    controller: str
    steps: int
    timestep_hours: float
    total_energy_kwh: float
    it_energy_kwh: float
    hvac_energy_kwh: float
    battery_charge_kwh: float
    battery_discharge_kwh: float
    battery_throughput_kwh: float
    carbon_kg: float
    total_penalty: float
    total_reward: float
    avg_pue: float
    work_offered: float = 0.0
    work_executed: float = 0.0
    work_dropped: float = 0.0


def reset(cfg: DataCenterConfig, traces: AlignedTraces, seed: int = 0):
    """Start an episode; returns (state, per-agent observations).

    Deterministic for fixed arguments: setpoint starts at setpoint_ref, SoC
    at initial_soc_fraction * capacity, empty shift queue.
    """
    report = validate_config(cfg)
    if not report.ok:
        paths = ", ".join(i.path for i in report.errors())
        raise EnvError(f"invalid config: errors at {paths}")
    if traces.step_hours != cfg.timestep_hours:
        raise EnvError(f"trace step {traces.step_hours} h does not match "
                       f"config timestep {cfg.timestep_hours} h")
    state = SimState(
        cfg=cfg,
        traces=traces,
        t=0,
        setpoint=cfg.hvac.setpoint_ref,
        battery=BatteryState(soc=cfg.battery.initial_soc_fraction * cfg.battery.capacity),
        queue=ShiftQueue(),
        cumulative=EpisodeAccumulator(),
        rng_seed=seed,
    )
    return state, observe(state)


def _check_actions(actions: AgentActions) -> None:
    if actions.ls not in SHIFT_ACTIONS:
        raise EnvError(f"unknown load-shift action {actions.ls!r}")
    if actions.hvac not in HVAC_ACTIONS:
        raise EnvError(f"unknown hvac action {actions.hvac!r}")
    if actions.bat not in BATTERY_ACTIONS:
        raise EnvError(f"unknown battery action {actions.bat!r}")


def step(state: SimState, actions: AgentActions):
    """Advance one step; returns (new_state, per-agent observations, StepResult)."""
    tr = state.traces
    if state.t >= tr.horizon:
        raise EnvError("episode is done; reset before stepping again")
    _check_actions(actions)
    cfg = state.cfg
    dt = cfg.timestep_hours
    t = state.t

    # (1) setpoint move, clamped to the allowed range
    setpoint = state.setpoint + _HVAC_DELTA[actions.hvac]
    setpoint = min(max(setpoint, cfg.hvac.setpoint_min), cfg.hvac.setpoint_max)

    # (2) load shifting on this step's base utilization
    base_util = tr.workload[t]
    shift = ls_mod.apply_action(state.queue, base_util, actions.ls, t, cfg.loadshift)

    # (3) IT room physics at the effective utilization
    it = thermal.room_step(cfg, setpoint, shift.effective_util)

    # (4) cooling plant against current weather
    hvac = plant_step(it.it_power, it.crac_flow_ratio, tr.weather[t], setpoint, cfg.hvac)

    # (5) battery dispatch over the facility load
    dc_load_kwh = (it.it_power + hvac.total) * dt / 1000.0
    bat = battery_step(state.battery, actions.bat, dc_load_kwh, dt, cfg.battery)
    grid_energy_kwh = dc_load_kwh + bat.grid_energy_delta

    # (6) carbon mass from grid energy and current intensity
    carbon_kg = grid_energy_kwh * tr.carbon_intensity[t] / 1000.0

    # (7)-(8) reward, advance, end-of-episode settlement
    penalty = shift.penalty
    queue = shift.new_queue
    work_executed = shift.effective_util
    done = t + 1 == tr.horizon
    if done and queue.entries:
        forced, flush_dropped = ls_mod.flush(queue, [0.0], cfg.loadshift)
        work_executed += sum(forced)
        penalty += cfg.loadshift.drop_penalty_weight * flush_dropped
        queue = ShiftQueue()
    else:
        flush_dropped = 0.0

    rw = cfg.reward
    reward = (-(rw.carbon_weight * carbon_kg + rw.energy_weight * grid_energy_kwh)
              / rw.norm - rw.penalty_weight * penalty)
    rewards = {agent: reward for agent in AGENTS}

    acc = state.cumulative
    new_acc = EpisodeAccumulator(
        steps=acc.steps + 1,
        total_energy_kwh=acc.total_energy_kwh + grid_energy_kwh,
        it_energy_kwh=acc.it_energy_kwh + it.it_power * dt / 1000.0,
        hvac_energy_kwh=acc.hvac_energy_kwh + hvac.total * dt / 1000.0,
        battery_charge_kwh=acc.battery_charge_kwh + max(bat.grid_energy_delta, 0.0),
        battery_discharge_kwh=acc.battery_discharge_kwh - min(bat.grid_energy_delta, 0.0),
        carbon_kg=acc.carbon_kg + carbon_kg,
        total_penalty=acc.total_penalty + penalty,
        total_reward=acc.total_reward + reward,
        work_offered=acc.work_offered + base_util,
        work_executed=acc.work_executed + work_executed,
        work_dropped=acc.work_dropped + shift.dropped + flush_dropped,
    )

    new_state = SimState(
        cfg=cfg,
        traces=tr,
        t=t + 1,
        setpoint=setpoint,
        battery=BatteryState(soc=bat.new_soc),
        queue=queue,
        cumulative=new_acc,
        rng_seed=state.rng_seed,
        last_it_power_kw=it.it_power / 1000.0,
        last_total_power_kw=(it.it_power + hvac.total) / 1000.0,
    )

    result = StepResult(
        it_power_kw=it.it_power / 1000.0,
        hvac_power_kw=hvac.total / 1000.0,
        grid_energy_kwh=grid_energy_kwh,
        carbon_kg=carbon_kg,
        penalty=penalty,
        rewards=rewards,
        done=done,
        hotspot=thermal.hotspot_grid(cfg, it),
        shift=shift,
        battery_outcome=bat,
    )
    return new_state, observe(new_state), result


def observe(state: SimState) -> dict[str, np.ndarray]:
    """Per-agent observation vectors (identical except the agent one-hot tail).

    Layout (18 entries): hour-of-day sin/cos, ambient temperature, carbon
    intensity now plus a 4-step forecast (last value held at the horizon
    edge), base utilization, queued shiftable work, battery SoC fraction,
    setpoint normalized to its range, last-step IT and total power in kW,
    episode progress, and a 3-way agent one-hot.
    """
    tr = state.traces
    cfg = state.cfg
    t = state.t
    last = tr.horizon - 1
    idx = min(t, last)

    start = tr.start
    hour = (start.hour + start.minute / 60.0 + start.second / 3600.0
            + t * tr.step_hours) % 24.0
    angle = 2.0 * math.pi * hour / 24.0
    hv = cfg.hvac
    common = [
        math.sin(angle),
        math.cos(angle),
        tr.weather[idx],
        tr.carbon_intensity[idx],
        tr.carbon_intensity[min(t + 1, last)],
        tr.carbon_intensity[min(t + 2, last)],
        tr.carbon_intensity[min(t + 3, last)],
        tr.carbon_intensity[min(t + 4, last)],
        tr.workload[idx],
        state.queue.total,
        state.battery.soc / cfg.battery.capacity,
        (state.setpoint - hv.setpoint_min) / (hv.setpoint_max - hv.setpoint_min),
        state.last_it_power_kw,
        state.last_total_power_kw,
        t / tr.horizon,
        0.0, 0.0, 0.0,
    ]
    obs = {}
    for i, agent in enumerate(AGENTS):
        vec = np.array(common, dtype=np.float64)
        vec[15 + i] = 1.0
        obs[agent] = vec
    return obs


def episode_metrics(state: SimState, controller: str = "") -> EpisodeReport:
    """Aggregate a finished episode into an :class:`EpisodeReport`."""
    if state.t != state.traces.horizon:
        raise EnvError(f"episode not finished: t={state.t} of {state.traces.horizon}")
    acc = state.cumulative
    return EpisodeReport(
        controller=controller,
        steps=acc.steps,
        timestep_hours=state.cfg.timestep_hours,
        total_energy_kwh=acc.total_energy_kwh,
        it_energy_kwh=acc.it_energy_kwh,
        hvac_energy_kwh=acc.hvac_energy_kwh,
        battery_charge_kwh=acc.battery_charge_kwh,
        battery_discharge_kwh=acc.battery_discharge_kwh,
        battery_throughput_kwh=acc.battery_charge_kwh + acc.battery_discharge_kwh,
        carbon_kg=acc.carbon_kg,
        total_penalty=acc.total_penalty,
        total_reward=acc.total_reward,
        avg_pue=(acc.it_energy_kwh + acc.hvac_energy_kwh) / acc.it_energy_kwh,
        work_offered=acc.work_offered,
        work_executed=acc.work_executed,
        work_dropped=acc.work_dropped,
    )
