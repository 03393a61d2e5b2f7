"""Gym-style multi-agent wrapper over the dctwin simulation core.

The adapter is a pure boundary: all physics, scheduling, and rewards live in
``dctwin``; numerical values cross unchanged, bit for bit.  It follows the
parallel multi-agent reset/step conventions of the RL ecosystem with dict
observations, rewards, terminations, truncations, and infos keyed by the
agent names ``"ls"``, ``"hvac"``, ``"bat"``.

Discrete action encoding (index 0/1/2 per agent, the canonical
lexicographic order of the native action sets):

    ls:   0=store  1=passthrough  2=release
    hvac: 0=dec    1=hold         2=inc
    bat:  0=charge 1=idle         2=discharge
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

import dctwin as d

__all__ = ["Box", "Discrete", "DataCenterMultiAgentEnv", "make_env",
           "AGENTS", "ACTION_MEANINGS"]

AGENTS = d.AGENTS  # ("ls", "hvac", "bat")

ACTION_MEANINGS = {
    "ls": d.SHIFT_ACTIONS,
    "hvac": d.HVAC_ACTIONS,
    "bat": d.BATTERY_ACTIONS,
}

_INF = float("inf")

# Per-entry observation bounds: hour sin/cos, ambient, CI now + 4 forecasts,
# base util, queued work, SoC fraction, normalized setpoint, last IT and
# total power (kW), episode progress, agent one-hot.
_OBS_LOW = np.array([-1, -1, -_INF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                    dtype=np.float64)
_OBS_HIGH = np.array([1, 1, _INF, _INF, _INF, _INF, _INF, _INF, 1, _INF, 1, 1,
                      _INF, _INF, 1, 1, 1, 1], dtype=np.float64)


@dataclass(frozen=True)
class Box:
    """Continuous vector space with per-entry closed bounds."""

    low: np.ndarray
    high: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.low.shape

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return (x.shape == self.low.shape and bool(np.all(x >= self.low))
                and bool(np.all(x <= self.high)))


@dataclass(frozen=True)
class Discrete:
    """Integer actions 0..n-1."""

    n: int

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and not isinstance(x, bool) \
            and 0 <= int(x) < self.n


def _observation_space() -> Box:
    return Box(low=_OBS_LOW.copy(), high=_OBS_HIGH.copy())


class DataCenterMultiAgentEnv:
    """One handle owning one native simulation state.

    Distinct handles are fully independent; a handle is not shareable across
    threads.  ``step`` after the episode is done raises ``dctwin.EnvError``;
    an action outside {0, 1, 2} raises ``ValueError``.
    """

    agents = AGENTS

    def __init__(self, cfg: d.DataCenterConfig, traces: d.AlignedTraces,
                 seed: int = 0):
        self._cfg = cfg
        self._traces = traces
        self._seed = seed
        self.observation_spaces = {agent: _observation_space() for agent in AGENTS}
        self.action_spaces = {agent: Discrete(3) for agent in AGENTS}
        self._state, self._obs = d.reset(cfg, traces, seed)

    def reset(self, seed: int | None = None):
        """Returns (observations, infos); reseeds when ``seed`` is given."""
        if seed is not None:
            self._seed = seed
        self._state, self._obs = d.reset(self._cfg, self._traces, self._seed)
        return self._obs, {agent: {} for agent in AGENTS}

    def _decode(self, actions: dict) -> d.AgentActions:
        decoded = {}
        for agent in AGENTS:
            if agent not in actions:
                raise ValueError(f"missing action for agent {agent!r}")
            a = actions[agent]
            if not self.action_spaces[agent].contains(a):
                raise ValueError(f"invalid action {a!r} for agent {agent!r}; "
                                 "expected an integer in {0, 1, 2}")
            decoded[agent] = ACTION_MEANINGS[agent][int(a)]
        return d.AgentActions(ls=decoded["ls"], hvac=decoded["hvac"],
                              bat=decoded["bat"])

    def step(self, actions: dict):
        """Returns (observations, rewards, terminations, truncations, infos)."""
        joint = self._decode(actions)
        self._state, self._obs, result = d.step(self._state, joint)
        rewards = result.rewards
        terminations = {agent: result.done for agent in AGENTS}
        truncations = {agent: False for agent in AGENTS}
        info = {
            "it_power_kw": result.it_power_kw,
            "hvac_power_kw": result.hvac_power_kw,
            "grid_energy_kwh": result.grid_energy_kwh,
            "carbon_kg": result.carbon_kg,
            "penalty": result.penalty,
            "setpoint": self._state.setpoint,
            "soc_kwh": self._state.battery.soc,
        }
        infos = {agent: info for agent in AGENTS}
        return self._obs, rewards, terminations, truncations, infos

    @property
    def state(self) -> d.SimState:
        """The underlying native state (read-only by convention)."""
        return self._state

    def metrics(self, controller: str = "gym") -> d.EpisodeReport:
        """Native episode report; valid once the episode is done."""
        return d.episode_metrics(self._state, controller=controller)

    def close(self) -> None:
        pass


def make_env(config_path: str | Path | None, weather_path: str | Path,
             ci_path: str | Path, workload_path: str | Path, seed: int = 0,
             horizon: int | None = None) -> DataCenterMultiAgentEnv:
    """Build an environment handle from the native file formats.

    Validation, parsing, and alignment errors propagate as the native
    exceptions with their original messages.
    """
    from dctwin import harness

    cfg = harness.load_config_file(config_path)
    traces = harness.load_aligned_traces(weather_path, ci_path, workload_path,
                                         cfg.timestep_hours, horizon)
    return DataCenterMultiAgentEnv(cfg, traces, seed)
