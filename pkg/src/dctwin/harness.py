"""Episode runner, report files, and controller comparison tables.

The five public wire formats live here and in ``traces``/``config``: trace
CSV, config JSON, report JSON, report CSV, and hotspot grid CSV/JSON.  All
of them are documented bit-exactly in ``docs/file-formats.md``; float
fields serialize via ``repr`` so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import env
from .config import DataCenterConfig, default_config, parse_config, validate_config
from .controllers import Controller, build_controller
from .env import EpisodeReport
from .thermal import TemperatureGrid, hotspot_grid, room_step
from .traces import AlignedTraces, TimeSeries, TraceError, align, load_trace

REPORT_FIELDS = (
    "controller", "steps", "timestep_hours", "total_energy_kwh", "it_energy_kwh",
    "hvac_energy_kwh", "battery_charge_kwh", "battery_discharge_kwh",
    "battery_throughput_kwh", "carbon_kg", "total_penalty", "total_reward",
    "avg_pue", "work_offered", "work_executed", "work_dropped",
)

STEP_FIELDS = (
    "t", "setpoint", "base_util", "effective_util", "it_power_kw", "hvac_power_kw",
    "grid_energy_kwh", "carbon_kg", "soc_kwh", "penalty", "reward",
)


@dataclass(frozen=True)
class ComparisonRow:
    """One controller's totals and percentage reductions against a reference."""

    name: str
    energy_kwh: float
    carbon_kg: float
    energy_reduction_pct: float
    carbon_reduction_pct: float


def load_config_file(path: str | Path | None) -> DataCenterConfig:
    """Read, parse, and validate a config file (or the defaults when None)."""
    if path is None:
        cfg = default_config()
    else:
        cfg = parse_config(Path(path).read_text())
    report = validate_config(cfg)
    if not report.ok:
        issues = "; ".join(f"{i.path}: {i.message}" for i in report.errors())
        raise env.EnvError(f"invalid config: {issues}")
    return cfg


def load_aligned_traces(weather_path: str | Path, ci_path: str | Path,
                        workload_path: str | Path, step_hours: float,
                        horizon: int | None) -> AlignedTraces:
    """Load the three trace files and align them to the episode clock.

    When ``horizon`` is None the full overlapping window is used.
    """
    weather = load_trace(Path(weather_path).read_text(), "weather")
    ci = load_trace(Path(ci_path).read_text(), "carbon_intensity")
    workload = load_trace(Path(workload_path).read_text(), "workload")
    if horizon is None:
        horizon = available_steps(weather, ci, workload, step_hours)
    return align(weather, ci, workload, step_hours, horizon)


def available_steps(weather: TimeSeries, ci: TimeSeries, workload: TimeSeries,
                    step_hours: float) -> int:
    """Largest horizon the three series jointly support at the given step."""
    step_s = int(round(step_hours * 3600.0))
    start = max(ts.start for ts in (weather, ci, workload))
    end = min(ts.end for ts in (weather, ci, workload))
    if end < start:
        raise TraceError("traces share no overlapping window")
    return int((end - start).total_seconds()) // step_s + 1


def run_loop(cfg: DataCenterConfig, traces: AlignedTraces, controller: Controller,
             seed: int, collect_steps: bool = False):
    """Drive one full episode; returns (report, per-step rows or None)."""
    controller.reset()
    state, obs = env.reset(cfg, traces, seed)
    rows = [] if collect_steps else None
    while state.t < traces.horizon:
        action = controller.act(obs, state)
        prev_t = state.t
        state, obs, result = env.step(state, action)
        if rows is not None:
            rows.append({
                "t": prev_t,
                "setpoint": state.setpoint,
                "base_util": traces.workload[prev_t],
                "effective_util": result.shift.effective_util,
                "it_power_kw": result.it_power_kw,
                "hvac_power_kw": result.hvac_power_kw,
                "grid_energy_kwh": result.grid_energy_kwh,
                "carbon_kg": result.carbon_kg,
                "soc_kwh": state.battery.soc,
                "penalty": result.penalty,
                "reward": result.rewards["ls"],
            })
    report = env.episode_metrics(state, controller=controller.name)
    return report, rows


def run_episode(config_path, weather_path, ci_path, workload_path,
                controller_name: str, seed: int = 0, horizon: int | None = None,
                collect_steps: bool = False):
    """File-driven episode: parse, validate, align, run, aggregate."""
    cfg = load_config_file(config_path)
    traces = load_aligned_traces(weather_path, ci_path, workload_path,
                                 cfg.timestep_hours, horizon)
    controller = build_controller(controller_name, cfg, traces, seed)
    return run_loop(cfg, traces, controller, seed, collect_steps=collect_steps)


def compare(reports: list[EpisodeReport], reference_index: int = 0) -> list[ComparisonRow]:
    """Percentage energy/carbon reductions of each report against the reference."""
    if len(reports) < 2:
        raise ValueError("compare needs at least 2 reports")
    if not 0 <= reference_index < len(reports):
        raise ValueError(f"reference index {reference_index} out of range")
    ref = reports[reference_index]
    if ref.total_energy_kwh <= 0 or ref.carbon_kg <= 0:
        raise ValueError("reference report has non-positive energy or carbon totals")
    rows = []
    for report in reports:
        rows.append(ComparisonRow(
            name=report.controller,
            energy_kwh=report.total_energy_kwh,
            carbon_kg=report.carbon_kg,
            energy_reduction_pct=100.0 * (ref.total_energy_kwh - report.total_energy_kwh)
            / ref.total_energy_kwh,
            carbon_reduction_pct=100.0 * (ref.carbon_kg - report.carbon_kg)
            / ref.carbon_kg,
        ))
    return rows


def report_to_json(report: EpisodeReport) -> str:
    doc = {name: getattr(report, name) for name in REPORT_FIELDS}
    return json.dumps(doc, indent=2) + "\n"


def report_to_csv(report: EpisodeReport) -> str:
    values = [_cell(getattr(report, name)) for name in REPORT_FIELDS]
    return ",".join(REPORT_FIELDS) + "\n" + ",".join(values) + "\n"


def report_from_json(text: str) -> EpisodeReport:
    doc = json.loads(text)
    return EpisodeReport(**{name: doc[name] for name in REPORT_FIELDS})


def report_from_csv(text: str) -> EpisodeReport:
    header, row = [ln for ln in text.splitlines() if ln][:2]
    kwargs = {}
    for name, cell in zip(header.split(","), row.split(",")):
        if name == "controller":
            kwargs[name] = cell
        elif name == "steps":
            kwargs[name] = int(cell)
        else:
            kwargs[name] = float(cell)
    return EpisodeReport(**kwargs)


def _cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def emit_report(report: EpisodeReport, fmt: str, path: str | Path,
                steps: list[dict] | None = None) -> None:
    """Write a report file; per-step rows (if given) go to a sibling CSV."""
    path = Path(path)
    if fmt == "json":
        path.write_text(report_to_json(report))
    elif fmt == "csv":
        path.write_text(report_to_csv(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}; expected json or csv")
    if steps is not None:
        steps_path = path.with_name(path.stem + "_steps.csv")
        lines = [",".join(STEP_FIELDS)]
        for row in steps:
            lines.append(",".join(_cell(row[name]) for name in STEP_FIELDS))
        steps_path.write_text("\n".join(lines) + "\n")


def comparison_to_csv(rows: list[ComparisonRow]) -> str:
    header = "name,energy_kwh,carbon_kg,energy_reduction_pct,carbon_reduction_pct"
    lines = [header]
    for row in rows:
        lines.append(",".join([
            row.name, _cell(row.energy_kwh), _cell(row.carbon_kg),
            f"{row.energy_reduction_pct:.2f}", f"{row.carbon_reduction_pct:.2f}",
        ]))
    return "\n".join(lines) + "\n"


def comparison_to_json(rows: list[ComparisonRow]) -> str:
    doc = [{
        "name": row.name,
        "energy_kwh": row.energy_kwh,
        "carbon_kg": row.carbon_kg,
        "energy_reduction_pct": round(row.energy_reduction_pct, 2),
        "carbon_reduction_pct": round(row.carbon_reduction_pct, 2),
    } for row in rows]
    return json.dumps(doc, indent=2) + "\n"


def grid_to_csv(grid: TemperatureGrid, which: str = "inlet") -> str:
    """Row-major grid CSV: exactly ``rows`` lines of ``cols`` values."""
    values = getattr(grid, which)
    lines = []
    for r in range(grid.rows):
        row = values[r * grid.cols:(r + 1) * grid.cols]
        lines.append(",".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def grid_to_json(grid: TemperatureGrid) -> str:
    doc = {"rows": grid.rows, "cols": grid.cols,
           "inlet": list(grid.inlet), "outlet": list(grid.outlet)}
    return json.dumps(doc, indent=2) + "\n"


def emit_hotspots(config_path, setpoint: float | None, utilization: float,
                  fmt: str, path: str | Path) -> TemperatureGrid:
    """Run the room model once at an operating point and write the grid."""
    cfg = load_config_file(config_path)
    if setpoint is None:
        setpoint = cfg.hvac.setpoint_ref
    result = room_step(cfg, setpoint, utilization)
    grid = hotspot_grid(cfg, result)
    path = Path(path)
    if fmt == "json":
        path.write_text(grid_to_json(grid))
    elif fmt == "csv":
        path.write_text(grid_to_csv(grid))
    else:
        raise ValueError(f"unknown hotspot format {fmt!r}; expected json or csv")
    return grid
