"""Reference controllers and desk-scale optimizers.

Controllers map (observations, state) to one joint action.  The optimizers
search action space directly: an exhaustive oracle for tiny horizons (the
ground truth the heuristics are judged against) and a restart hill climber
over setpoint schedules.  Episode cost is -(sum of per-step rewards).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import env
from .battery import BATTERY_ACTIONS
from .config import DataCenterConfig
from .env import AgentActions, HVAC_ACTIONS, SimState
from .loadshift import SHIFT_ACTIONS
from .traces import AlignedTraces

MAX_ORACLE_HORIZON = 6
DEFAULT_ORACLE_HORIZON = 4

# Canonical lexicographic joint-action order: store<passthrough<release,
# dec<hold<inc, charge<idle<discharge.  Index = 9*ls + 3*hvac + bat.
JOINT_ACTIONS: tuple[AgentActions, ...] = tuple(
    AgentActions(ls=ls, hvac=hv, bat=bat)
    for ls in SHIFT_ACTIONS for hv in HVAC_ACTIONS for bat in BATTERY_ACTIONS
)

_PASSIVE = AgentActions(ls="passthrough", hvac="hold", bat="idle")


class Controller:
    """Policy interface; subclasses with memory must also implement reset()."""

    name = "controller"

    def reset(self) -> None:
        pass

    def act(self, obs: dict[str, np.ndarray], state: SimState) -> AgentActions:
        raise NotImplementedError


class FixedSetpointController(Controller):
    """Rule baseline: steer the setpoint to a hold value, then do nothing."""

    name = "fixed"

    def __init__(self, setpoint_hold: float = 22.0):
        self.setpoint_hold = setpoint_hold

    def act(self, obs, state):
        if state.setpoint < self.setpoint_hold:
            hvac = "inc"
        elif state.setpoint > self.setpoint_hold:
            hvac = "dec"
        else:
            hvac = "hold"
        return AgentActions(ls="passthrough", hvac=hvac, bat="idle")


class CarbonGreedyController(Controller):
    """Carbon-chasing heuristic using the observation's CI forecast.

    Stores load when intensity beats the short forecast mean and releases
    when below it; charges/discharges the battery against the trailing
    episode mean; picks the setpoint move with the best one-step simulated
    cost (ties toward hold).
    """

    name = "greedy"

    def __init__(self):
        self._ci_sum = 0.0
        self._ci_count = 0

    def reset(self):
        self._ci_sum = 0.0
        self._ci_count = 0

    def act(self, obs, state):
        vec = obs["ls"]
        ci_now = vec[3]
        forecast_mean = (vec[4] + vec[5] + vec[6] + vec[7]) / 4.0
        if ci_now > forecast_mean:
            ls = "store"
        elif ci_now < forecast_mean:
            ls = "release"
        else:
            ls = "passthrough"

        self._ci_sum += ci_now
        self._ci_count += 1
        trailing = self._ci_sum / self._ci_count
        if ci_now < trailing:
            bat = "charge"
        elif ci_now > trailing:
            bat = "discharge"
        else:
            bat = "idle"

        best_cost = math.inf
        best_hvac = "hold"
        for hvac in ("hold", "dec", "inc"):
            _, _, result = env.step(state, AgentActions(ls=ls, hvac=hvac, bat=bat))
            cost = -result.rewards["ls"]
            if cost < best_cost:
                best_cost = cost
                best_hvac = hvac
        return AgentActions(ls=ls, hvac=best_hvac, bat=bat)


class ScriptedController(Controller):
    """Replays a precomputed joint-action sequence, indexed by the state's step."""

    def __init__(self, actions: tuple[AgentActions, ...], name: str = "scripted"):
        self.actions = tuple(actions)
        self.name = name

    def act(self, obs, state):
        return self.actions[state.t]


def run_actions(cfg: DataCenterConfig, traces: AlignedTraces,
                actions: tuple[AgentActions, ...], seed: int = 0):
    """Replay a full action sequence; returns (final_state, total cost)."""
    state, _ = env.reset(cfg, traces, seed)
    cost = 0.0
    for action in actions:
        state, _, result = env.step(state, action)
        cost -= result.rewards["ls"]
    return state, cost


def _best_suffix(state: SimState, cost: float, depth: int, horizon: int):
    """Lexicographic-first argmin over all action suffixes from ``state``."""
    if depth == horizon:
        return cost, ()
    best_cost = math.inf
    best_seq: tuple[int, ...] = ()
    for idx, action in enumerate(JOINT_ACTIONS):
        nxt, _, result = env.step(state, action)
        sub_cost, sub_seq = _best_suffix(nxt, cost - result.rewards["ls"],
                                         depth + 1, horizon)
        if sub_cost < best_cost:
            best_cost = sub_cost
            best_seq = (idx,) + sub_seq
    return best_cost, best_seq


def exhaustive_oracle(cfg: DataCenterConfig, traces: AlignedTraces,
                      horizon_cap: int = DEFAULT_ORACLE_HORIZON, workers: int = 1):
    """Enumerate every joint action sequence over the episode and return
    (argmin sequence, minimum total cost).

    Ties break lexicographically over the action encoding, so the result is
    bit-reproducible and independent of ``workers``.
    """
    if horizon_cap > MAX_ORACLE_HORIZON:
        raise ValueError(f"horizon cap {horizon_cap} exceeds the enumerable "
                         f"maximum {MAX_ORACLE_HORIZON}")
    if traces.horizon > horizon_cap:
        raise ValueError(f"episode horizon {traces.horizon} exceeds the oracle "
                         f"cap {horizon_cap}")
    horizon = traces.horizon
    state0, _ = env.reset(cfg, traces, 0)

    def branch(first: int):
        nxt, _, result = env.step(state0, JOINT_ACTIONS[first])
        sub_cost, sub_seq = _best_suffix(nxt, 0.0 - result.rewards["ls"], 1, horizon)
        return sub_cost, (first,) + sub_seq

    if workers <= 1:
        results = [branch(i) for i in range(len(JOINT_ACTIONS))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(branch, range(len(JOINT_ACTIONS))))
    best_cost, best_seq = min(results, key=lambda item: (item[0], item[1]))
    return tuple(JOINT_ACTIONS[i] for i in best_seq), best_cost


def _setpoint_grid(cfg: DataCenterConfig) -> list[float]:
    """All setpoints reachable from the reference via +-1 degC moves with clamping."""
    hv = cfg.hvac
    seen = {hv.setpoint_ref}
    frontier = [hv.setpoint_ref]
    while frontier:
        v = frontier.pop()
        for nxt in (v - 1.0, v + 1.0):
            nxt = min(max(nxt, hv.setpoint_min), hv.setpoint_max)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return sorted(seen)


def schedule_to_actions(schedule, setpoint_ref: float) -> tuple[AgentActions, ...]:
    """Convert a reachable setpoint schedule into hvac actions (ls/bat passive)."""
    actions = []
    current = setpoint_ref
    for target in schedule:
        diff = target - current
        if diff > 0.5:
            hvac = "inc"
        elif diff < -0.5:
            hvac = "dec"
        else:
            hvac = "hold"
        actions.append(AgentActions(ls="passthrough", hvac=hvac, bat="idle"))
        current = target
    return tuple(actions)


def hill_climb_setpoint(cfg: DataCenterConfig, traces: AlignedTraces,
                        restarts: int = 0, seed: int = 0,
                        history: list | None = None):
    """First-improvement hill climb over per-step setpoint schedules.

    Schedules are constrained to what the +-1 degC action dynamics can reach.
    With the load-shift and battery channels passive the queue stays empty
    and the SoC constant, so each step's cost depends only on (setpoint, t);
    costs are therefore precomputed per (step, setpoint) and full-schedule
    costs are exact left-to-right sums of table entries, bit-identical to an
    environment replay.  Returns (best schedule, its replayed total cost).

    When ``history`` is a list, (start_index, cost) is appended for the
    start and for every accepted move of each descent.
    """
    horizon = traces.horizon
    hv = cfg.hvac
    ref = hv.setpoint_ref
    grid = _setpoint_grid(cfg)
    state0, _ = env.reset(cfg, traces, seed)

    # cost_table[t][value] = one-step cost with post-action setpoint = value
    cost_table: list[dict[float, float]] = []
    for t in range(horizon):
        row = {}
        for value in grid:
            probe = replace(state0, t=t, setpoint=value)
            _, _, result = env.step(probe, _PASSIVE)
            row[value] = -result.rewards["ls"]
        cost_table.append(row)

    def total_cost(schedule: list[float]) -> float:
        cost = 0.0
        for t in range(horizon):
            cost += cost_table[t][schedule[t]]
        return cost

    def reachable_after_change(schedule: list[float], t: int, value: float) -> bool:
        prev = ref if t == 0 else schedule[t - 1]
        if abs(value - prev) > 1.0 + 1e-9:
            return False
        if t + 1 < horizon and abs(schedule[t + 1] - value) > 1.0 + 1e-9:
            return False
        return hv.setpoint_min <= value <= hv.setpoint_max

    def descend(schedule: list[float], start_index: int) -> tuple[list[float], float]:
        current = total_cost(schedule)
        if history is not None:
            history.append((start_index, current))
        improved = True
        while improved:
            improved = False
            for t in range(horizon):
                for delta in (-1.0, 1.0):
                    value = schedule[t] + delta
                    if value not in cost_table[t]:
                        continue
                    if not reachable_after_change(schedule, t, value):
                        continue
                    old = schedule[t]
                    schedule[t] = value
                    candidate = total_cost(schedule)
                    if candidate < current:
                        current = candidate
                        improved = True
                        if history is not None:
                            history.append((start_index, current))
                    else:
                        schedule[t] = old
        return schedule, current

    rng = np.random.default_rng(seed)
    starts = [[ref] * horizon]
    for _ in range(restarts):
        value = ref
        walk = []
        for _ in range(horizon):
            value = min(max(value + rng.choice((-1.0, 0.0, 1.0)), hv.setpoint_min),
                        hv.setpoint_max)
            walk.append(float(value))
        starts.append(walk)

    best_schedule: list[float] | None = None
    best_cost = math.inf
    for start_index, start in enumerate(starts):
        schedule, cost = descend(start, start_index)
        if cost < best_cost:
            best_cost = cost
            best_schedule = schedule

    assert best_schedule is not None
    _, replay_cost = run_actions(cfg, traces, schedule_to_actions(best_schedule, ref),
                                 seed)
    return tuple(best_schedule), replay_cost


def build_controller(name: str, cfg: DataCenterConfig, traces: AlignedTraces,
                     seed: int = 0) -> Controller:
    """CLI-facing controller factory; optimizer-backed names precompute a script."""
    if name == "fixed":
        return FixedSetpointController()
    if name == "greedy":
        return CarbonGreedyController()
    if name == "hillclimb":
        schedule, _ = hill_climb_setpoint(cfg, traces, restarts=3, seed=seed)
        return ScriptedController(schedule_to_actions(schedule, cfg.hvac.setpoint_ref),
                                  name="hillclimb")
    if name == "exhaustive":
        actions, _ = exhaustive_oracle(cfg, traces)
        return ScriptedController(actions, name="exhaustive")
    raise ValueError(f"unknown controller {name!r}; "
                     "valid names: fixed, greedy, hillclimb, exhaustive")


CONTROLLER_NAMES = ("fixed", "greedy", "hillclimb", "exhaustive")
