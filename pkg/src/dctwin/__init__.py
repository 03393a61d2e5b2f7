"""Deterministic data center digital twin with multi-agent control."""

from .battery import BATTERY_ACTIONS, BatteryOutcome, BatteryState, battery_step
from .config import (
    BatterySpec,
    CabinetSpec,
    ConfigError,
    DataCenterConfig,
    HvacSpec,
    LoadShiftSpec,
    RewardSpec,
    RoomSpec,
    ServerSpec,
    UnknownConfigKeyWarning,
    ValidationIssue,
    ValidationReport,
    config_to_json,
    default_config,
    parse_config,
    validate_config,
)
from .controllers import (
    CONTROLLER_NAMES,
    CarbonGreedyController,
    Controller,
    FixedSetpointController,
    JOINT_ACTIONS,
    ScriptedController,
    build_controller,
    exhaustive_oracle,
    hill_climb_setpoint,
    run_actions,
    schedule_to_actions,
)
from .env import (
    AGENTS,
    AgentActions,
    EnvError,
    EpisodeReport,
    HVAC_ACTIONS,
    OBS_SIZE,
    SimState,
    StepResult,
    episode_metrics,
    observe,
    reset,
    step,
)
from .loadshift import SHIFT_ACTIONS, ShiftOutcome, ShiftQueue, apply_action, flush
from .plant import HvacResult, chiller_cop, crac_fan_power, plant_step
from .thermal import (
    AIR_SPECIFIC_HEAT,
    ItResult,
    TemperatureGrid,
    fan_ratio,
    hotspot_grid,
    room_step,
    server_power,
)
from .traces import (
    AlignedTraces,
    TimeSeries,
    TraceError,
    align,
    load_trace,
    resample,
    synth_diurnal,
    trace_to_csv,
)

__version__ = "0.1.0"
