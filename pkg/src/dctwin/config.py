"""Data center configuration: parsing, defaults, and validation.

The configuration is a single JSON object with lower_snake_case keys grouped
into sections: ``room``, ``server``, ``hvac``, ``battery``, ``loadshift``,
``reward``, plus top-level ``timestep_hours``.  Every key has a documented
default (see ``docs/config-schema.md``), so ``{}`` is a complete config.
Units are fixed: watts, degrees Celsius, kWh, kW, hours.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    """Raised for malformed JSON or a wrong JSON type at a known key."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnknownConfigKeyWarning(UserWarning):
    """Emitted once per unknown key found while parsing a config."""


@dataclass(frozen=True)
class ServerSpec:
    """Per-server electrical model: affine CPU power plus a cubic-law fan."""

    idle_power: float = 100.0       # W at zero utilization
    full_power: float = 300.0       # W at full utilization
    fan_ref_power: float = 25.0     # W at fan flow ratio 1.0
    fan_min_ratio: float = 0.3      # lower clamp on the fan flow ratio


@dataclass(frozen=True)
class CabinetSpec:
    """One IT cabinet: server count, inlet offset above supply air, airflow."""

    server_count: int = 20
    inlet_offset: float = 0.0       # degC added to the CRAC supply setpoint
    airflow_ref: float = 1.0        # kg/s of air through the cabinet at flow ratio 1.0


@dataclass(frozen=True)
class RoomSpec:
    """IT room layout: a rows x cabinets_per_row grid of cabinets."""

    rows: int = 2
    cabinets_per_row: int = 4
    cabinets: tuple[CabinetSpec, ...] = ()


@dataclass(frozen=True)
class HvacSpec:
    """Cooling plant parameters: CRAC fan, chiller COP line, tower, pumps."""

    crac_ref_power: float = 2000.0          # W at CRAC flow ratio 1.0
    cop_nominal: float = 6.0
    cop_ambient_slope: float = 0.15         # COP lost per degC of ambient above ambient_ref
    cop_setpoint_slope: float = 0.2         # COP gained per degC of setpoint above setpoint_ref
    cop_min: float = 2.0
    cop_max: float = 8.0
    ambient_ref: float = 15.0               # degC
    setpoint_ref: float = 22.0              # degC
    setpoint_min: float = 18.0              # degC
    setpoint_max: float = 27.0              # degC
    cooling_tower_ref_power: float = 1500.0  # W fan power at reference rejected heat
    cooling_tower_ref_load: float = 50000.0  # W thermal reference for the tower
    pump_power: float = 500.0               # W whenever the plant carries load


@dataclass(frozen=True)
class BatterySpec:
    """Auxiliary battery: symmetric rate limit, one-way efficiencies."""

    capacity: float = 500.0         # kWh
    max_rate: float = 100.0         # kW, charge and discharge limit
    charge_eff: float = 0.95
    discharge_eff: float = 0.95
    initial_soc_fraction: float = 0.5


@dataclass(frozen=True)
class LoadShiftSpec:
    """Flexible-load scheduler: per-step shiftable share and deadline queue."""

    shiftable_fraction: float = 0.3
    deadline_steps: int = 96
    util_capacity: float = 1.0      # maximum effective utilization
    drop_penalty_weight: float = 1.0


@dataclass(frozen=True)
class RewardSpec:
    """Shared-reward shaping weights for the three control agents."""

    carbon_weight: float = 1.0
    energy_weight: float = 0.0
    penalty_weight: float = 0.1
    norm: float = 1000.0


@dataclass(frozen=True)
class DataCenterConfig:
    room: RoomSpec = field(default_factory=RoomSpec)
    server: ServerSpec = field(default_factory=ServerSpec)
    hvac: HvacSpec = field(default_factory=HvacSpec)
    battery: BatterySpec = field(default_factory=BatterySpec)
    loadshift: LoadShiftSpec = field(default_factory=LoadShiftSpec)
    reward: RewardSpec = field(default_factory=RewardSpec)
    timestep_hours: float = 0.25


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str
    severity: str  # "error" | "warning"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[ValidationIssue, ...]

    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "error"]


def default_inlet_offsets(count: int) -> list[float]:
    """Linear 0..4 degC ramp across ``count`` cabinets (a built-in hotspot gradient)."""
    if count <= 1:
        return [0.0] * count
    return [4.0 * i / (count - 1) for i in range(count)]


# (field name -> converter) per section; converters raise TypeError on bad JSON types.

def _as_float(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    return float(v)


def _as_int(v) -> int:
    if isinstance(v, bool):
        raise TypeError("expected an integer")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise TypeError("expected an integer")


_SERVER_FIELDS = {
    "idle_power": _as_float,
    "full_power": _as_float,
    "fan_ref_power": _as_float,
    "fan_min_ratio": _as_float,
}
_CABINET_FIELDS = {
    "server_count": _as_int,
    "inlet_offset": _as_float,
    "airflow_ref": _as_float,
}
_HVAC_FIELDS = {
    "crac_ref_power": _as_float,
    "cop_nominal": _as_float,
    "cop_ambient_slope": _as_float,
    "cop_setpoint_slope": _as_float,
    "cop_min": _as_float,
    "cop_max": _as_float,
    "ambient_ref": _as_float,
    "setpoint_ref": _as_float,
    "setpoint_min": _as_float,
    "setpoint_max": _as_float,
    "cooling_tower_ref_power": _as_float,
    "cooling_tower_ref_load": _as_float,
    "pump_power": _as_float,
}
_BATTERY_FIELDS = {
    "capacity": _as_float,
    "max_rate": _as_float,
    "charge_eff": _as_float,
    "discharge_eff": _as_float,
    "initial_soc_fraction": _as_float,
}
_LOADSHIFT_FIELDS = {
    "shiftable_fraction": _as_float,
    "deadline_steps": _as_int,
    "util_capacity": _as_float,
    "drop_penalty_weight": _as_float,
}
_REWARD_FIELDS = {
    "carbon_weight": _as_float,
    "energy_weight": _as_float,
    "penalty_weight": _as_float,
    "norm": _as_float,
}

_SECTIONS = ("room", "server", "hvac", "battery", "loadshift", "reward")


def _parse_section(obj: dict, path: str, fields: dict, cls, defaults=None):
    """Build a spec dataclass from a JSON object, filling defaults and warning on unknowns."""
    defaults = defaults if defaults is not None else cls()
    kwargs = {}
    for key, value in obj.items():
        conv = fields.get(key)
        if conv is None:
            warnings.warn(UnknownConfigKeyWarning(f"unknown config key: {path}.{key}"))
            continue
        try:
            kwargs[key] = conv(value)
        except TypeError as exc:
            raise ConfigError(str(exc), f"{path}.{key}") from None
    for key in fields:
        kwargs.setdefault(key, getattr(defaults, key))
    return cls(**kwargs)


def _parse_room(obj: dict) -> RoomSpec:
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", "room")
    rows = RoomSpec.rows
    per_row = RoomSpec.cabinets_per_row
    cabinets_raw = None
    for key, value in obj.items():
        if key == "rows":
            try:
                rows = _as_int(value)
            except TypeError as exc:
                raise ConfigError(str(exc), "room.rows") from None
        elif key == "cabinets_per_row":
            try:
                per_row = _as_int(value)
            except TypeError as exc:
                raise ConfigError(str(exc), "room.cabinets_per_row") from None
        elif key == "cabinets":
            if not isinstance(value, list):
                raise ConfigError("expected an array", "room.cabinets")
            cabinets_raw = value
        else:
            warnings.warn(UnknownConfigKeyWarning(f"unknown config key: room.{key}"))

    if cabinets_raw is None:
        count = max(rows * per_row, 0)
        offsets = default_inlet_offsets(count)
        cabinets = tuple(CabinetSpec(inlet_offset=off) for off in offsets)
    else:
        offsets = default_inlet_offsets(len(cabinets_raw))
        cabinets = []
        for i, entry in enumerate(cabinets_raw):
            if not isinstance(entry, dict):
                raise ConfigError("expected an object", f"room.cabinets[{i}]")
            cab = _parse_section(
                entry, f"room.cabinets[{i}]", _CABINET_FIELDS, CabinetSpec,
                defaults=CabinetSpec(inlet_offset=offsets[i]),
            )
            cabinets.append(cab)
        cabinets = tuple(cabinets)
    return RoomSpec(rows=rows, cabinets_per_row=per_row, cabinets=cabinets)


def parse_config(json_text: str) -> DataCenterConfig:
    """Parse a JSON config document into a fully populated :class:`DataCenterConfig`.

    Missing keys take documented defaults; unknown keys emit
    :class:`UnknownConfigKeyWarning`.  Structural invariants (bounds, list
    lengths) are *not* enforced here -- run :func:`validate_config` on the
    result.  Raises :class:`ConfigError` for malformed JSON (with byte
    offset) or a wrong JSON type at a known key (with its path).
    """
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at byte offset {exc.pos}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top-level JSON value must be an object")

    room = _parse_room(raw.get("room", {})) if "room" in raw else _parse_room({})
    sections = {
        "server": (_SERVER_FIELDS, ServerSpec),
        "hvac": (_HVAC_FIELDS, HvacSpec),
        "battery": (_BATTERY_FIELDS, BatterySpec),
        "loadshift": (_LOADSHIFT_FIELDS, LoadShiftSpec),
        "reward": (_REWARD_FIELDS, RewardSpec),
    }
    parsed = {}
    for name, (fields, cls) in sections.items():
        obj = raw.get(name, {})
        if not isinstance(obj, dict):
            raise ConfigError("expected an object", name)
        parsed[name] = _parse_section(obj, name, fields, cls)

    timestep = DataCenterConfig.timestep_hours
    for key in raw:
        if key in _SECTIONS:
            continue
        if key == "timestep_hours":
            try:
                timestep = _as_float(raw[key])
            except TypeError as exc:
                raise ConfigError(str(exc), "timestep_hours") from None
        else:
            warnings.warn(UnknownConfigKeyWarning(f"unknown config key: {key}"))

    return DataCenterConfig(room=room, timestep_hours=timestep, **parsed)


def default_config() -> DataCenterConfig:
    """The all-defaults config; equals ``parse_config("{}")`` field for field."""
    return parse_config("{}")


def config_to_json(cfg: DataCenterConfig, indent: int | None = 2) -> str:
    """Serialize a config back to its canonical JSON document."""
    doc = {
        "room": {
            "rows": cfg.room.rows,
            "cabinets_per_row": cfg.room.cabinets_per_row,
            "cabinets": [asdict(c) for c in cfg.room.cabinets],
        },
        "server": asdict(cfg.server),
        "hvac": asdict(cfg.hvac),
        "battery": asdict(cfg.battery),
        "loadshift": asdict(cfg.loadshift),
        "reward": asdict(cfg.reward),
        "timestep_hours": cfg.timestep_hours,
    }
    return json.dumps(doc, indent=indent)


def validate_config(cfg: DataCenterConfig) -> ValidationReport:
    """Check every structural invariant; violations are reported, never raised.

    Each single-field invariant maps to exactly one rule so a single bad
    field yields exactly one error at that field's path (or its parent for
    cross-field rules).  Rules that depend on other fields being sane are
    skipped while their prerequisites fail.
    """
    issues: list[ValidationIssue] = []

    def err(path: str, message: str) -> None:
        issues.append(ValidationIssue(path, message, "error"))

    s = cfg.server
    if not s.idle_power > 0:
        err("server.idle_power", "idle_power must be > 0")
    elif not s.idle_power < s.full_power:
        err("server", "idle_power must be < full_power")
    if not s.fan_ref_power >= 0:
        err("server.fan_ref_power", "fan_ref_power must be >= 0")
    if not 0 < s.fan_min_ratio <= 1:
        err("server.fan_min_ratio", "fan_min_ratio must be in (0, 1]")

    r = cfg.room
    rows_ok = r.rows >= 1
    per_row_ok = r.cabinets_per_row >= 1
    if not rows_ok:
        err("room.rows", "rows must be >= 1")
    if not per_row_ok:
        err("room.cabinets_per_row", "cabinets_per_row must be >= 1")
    if rows_ok and per_row_ok and len(r.cabinets) != r.rows * r.cabinets_per_row:
        err("room.cabinets",
            f"cabinet list has {len(r.cabinets)} entries, expected rows*cabinets_per_row = {r.rows * r.cabinets_per_row}")
    for i, cab in enumerate(r.cabinets):
        if cab.server_count < 1:
            err(f"room.cabinets[{i}].server_count", "server_count must be >= 1")
        if not cab.inlet_offset >= 0:
            err(f"room.cabinets[{i}].inlet_offset", "inlet_offset must be >= 0")
        if not cab.airflow_ref > 0:
            err(f"room.cabinets[{i}].airflow_ref", "airflow_ref must be > 0")

    h = cfg.hvac
    if not h.cop_min > 0:
        err("hvac.cop_min", "cop_min must be > 0")
    elif not h.cop_min <= h.cop_nominal:
        err("hvac", "cop_min must be <= cop_nominal")
    elif not h.cop_nominal <= h.cop_max:
        err("hvac", "cop_nominal must be <= cop_max")
    if not h.setpoint_min < h.setpoint_max:
        err("hvac", "setpoint_min must be < setpoint_max")
    if not h.crac_ref_power >= 0:
        err("hvac.crac_ref_power", "crac_ref_power must be >= 0")
    if not h.cooling_tower_ref_power >= 0:
        err("hvac.cooling_tower_ref_power", "cooling_tower_ref_power must be >= 0")
    if not h.cooling_tower_ref_load > 0:
        err("hvac.cooling_tower_ref_load", "cooling_tower_ref_load must be > 0")
    if not h.pump_power >= 0:
        err("hvac.pump_power", "pump_power must be >= 0")

    b = cfg.battery
    if not b.capacity > 0:
        err("battery.capacity", "capacity must be > 0")
    if not b.max_rate > 0:
        err("battery.max_rate", "max_rate must be > 0")
    if not 0 < b.charge_eff <= 1:
        err("battery.charge_eff", "charge_eff must be in (0, 1]")
    if not 0 < b.discharge_eff <= 1:
        err("battery.discharge_eff", "discharge_eff must be in (0, 1]")
    if not 0 <= b.initial_soc_fraction <= 1:
        err("battery.initial_soc_fraction", "initial_soc_fraction must be in [0, 1]")

    ls = cfg.loadshift
    if not 0 <= ls.shiftable_fraction < 1:
        err("loadshift.shiftable_fraction", "shiftable_fraction must be in [0, 1)")
    if ls.deadline_steps < 1:
        err("loadshift.deadline_steps", "deadline_steps must be >= 1")
    if not 0 < ls.util_capacity <= 1:
        err("loadshift.util_capacity", "util_capacity must be in (0, 1]")
    if not ls.drop_penalty_weight >= 0:
        err("loadshift.drop_penalty_weight", "drop_penalty_weight must be >= 0")

    w = cfg.reward
    for name in ("carbon_weight", "energy_weight", "penalty_weight"):
        if not getattr(w, name) >= 0:
            err(f"reward.{name}", f"{name} must be >= 0")
    if not w.norm > 0:
        err("reward.norm", "norm must be > 0")

    if not cfg.timestep_hours > 0:
        err("timestep_hours", "timestep_hours must be > 0")

    return ValidationReport(ok=not any(i.severity == "error" for i in issues),
                            issues=tuple(issues))
