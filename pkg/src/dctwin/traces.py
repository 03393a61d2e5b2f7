"""External driving time series: weather, grid carbon intensity, workload.

CSV wire format (the public contract): header line ``timestamp,value``,
timestamps ``YYYY-MM-DDTHH:MM:SSZ`` (UTC, strictly increasing, uniformly
spaced), decimal point ``.``.  All grid arithmetic runs on integer seconds
so resampling is exact at shared grid points.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone

import numpy as np

TRACE_KINDS = ("weather", "carbon_intensity", "workload")

_TS_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

# Anchor for synthetic traces; any fixed instant works, midnight keeps
# hour-of-day features aligned with t=0.
SYNTH_START = datetime(2024, 1, 1, tzinfo=timezone.utc)


class TraceError(ValueError):
    """Raised for malformed trace CSV, range violations, or alignment failures."""


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled series of one trace kind."""

    kind: str
    start: datetime           # timezone-aware UTC
    step_hours: float
    values: tuple[float, ...]

    @property
    def step_seconds(self) -> int:
        return int(round(self.step_hours * 3600.0))

    @property
    def end(self) -> datetime:
        return self.start + timedelta(seconds=self.step_seconds * (len(self.values) - 1))


@dataclass(frozen=True)
class AlignedTraces:
    """Weather, carbon intensity, and workload on one shared episode clock."""

    start: datetime
    step_hours: float
    horizon: int
    weather: tuple[float, ...]
    carbon_intensity: tuple[float, ...]
    workload: tuple[float, ...]


def _check_kind(kind: str) -> None:
    if kind not in TRACE_KINDS:
        raise TraceError(f"unknown trace kind {kind!r}; expected one of {TRACE_KINDS}")


def _check_value(kind: str, value: float, row: int) -> None:
    if not np.isfinite(value):
        raise TraceError(f"row {row}: non-finite value {value!r}")
    if kind == "workload" and not 0.0 <= value <= 1.0:
        raise TraceError(f"row {row}: workload value {value} outside [0, 1]")
    if kind == "carbon_intensity" and value < 0.0:
        raise TraceError(f"row {row}: carbon intensity {value} must be >= 0")


def load_trace(csv_text: str, kind: str) -> TimeSeries:
    """Parse trace CSV into a :class:`TimeSeries`, inferring the step.

    Row numbers in errors count data rows from 1 (the header is row 0).
    """
    _check_kind(kind)
    lines = [ln.strip() for ln in csv_text.splitlines() if ln.strip()]
    if not lines:
        raise TraceError("empty trace file")
    if lines[0].replace(" ", "") != "timestamp,value":
        raise TraceError(f"bad header {lines[0]!r}; expected 'timestamp,value'")
    body = lines[1:]
    if not body:
        raise TraceError("trace has a header but no data rows")
    if len(body) < 2:
        raise TraceError("trace needs at least 2 rows to infer the sample spacing")

    times: list[datetime] = []
    values: list[float] = []
    for row, line in enumerate(body, start=1):
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceError(f"row {row}: expected 'timestamp,value', got {line!r}")
        ts_text, val_text = parts[0].strip(), parts[1].strip()
        try:
            ts = datetime.strptime(ts_text, _TS_FORMAT).replace(tzinfo=timezone.utc)
        except ValueError:
            raise TraceError(f"row {row}: bad timestamp {ts_text!r}; "
                             "expected YYYY-MM-DDTHH:MM:SSZ") from None
        try:
            value = float(val_text)
        except ValueError:
            raise TraceError(f"row {row}: bad value {val_text!r}") from None
        _check_value(kind, value, row)
        times.append(ts)
        values.append(value)

    step = (times[1] - times[0]).total_seconds()
    if step <= 0:
        raise TraceError("row 2: timestamps must be strictly increasing")
    for row in range(2, len(times)):
        gap = (times[row] - times[row - 1]).total_seconds()
        if gap != step:
            raise TraceError(f"row {row + 1}: non-uniform spacing "
                             f"({gap:.0f} s here vs {step:.0f} s inferred)")

    return TimeSeries(kind=kind, start=times[0], step_hours=step / 3600.0,
                      values=tuple(values))


def trace_to_csv(ts: TimeSeries) -> str:
    """Serialize back to the CSV wire format (round-trips with :func:`load_trace`)."""
    lines = ["timestamp,value"]
    step_s = ts.step_seconds
    for i, value in enumerate(ts.values):
        stamp = ts.start + timedelta(seconds=i * step_s)
        lines.append(f"{stamp.strftime(_TS_FORMAT)},{value!r}")
    return "\n".join(lines) + "\n"


def _interp_at(values: tuple[float, ...], step_s: int, offset_s: int) -> float:
    """Linear interpolation at offset_s seconds past the series start (exact at nodes)."""
    idx, rem = divmod(offset_s, step_s)
    if rem == 0:
        return values[idx]
    frac = rem / step_s
    return values[idx] + frac * (values[idx + 1] - values[idx])


def resample(ts: TimeSeries, target_step_hours: float) -> TimeSeries:
    """Linear resampling onto a grid of ``target_step_hours`` anchored at ``ts.start``.

    The output grid covers the original closed span; grid points that land on
    original samples reproduce them exactly.
    """
    if target_step_hours <= 0:
        raise TraceError("target step must be > 0")
    target_s = int(round(target_step_hours * 3600.0))
    if target_s <= 0:
        raise TraceError("target step rounds to < 1 second")
    src_s = ts.step_seconds
    span_s = src_s * (len(ts.values) - 1)
    n_out = span_s // target_s + 1
    if n_out < 1:
        raise TraceError("resampling would produce no samples")
    out = tuple(_interp_at(ts.values, src_s, k * target_s) for k in range(n_out))
    return replace(ts, step_hours=target_s / 3600.0, values=out)


def align(weather: TimeSeries, carbon_intensity: TimeSeries, workload: TimeSeries,
          step_hours: float, horizon: int) -> AlignedTraces:
    """Resample all three series to ``step_hours``, crop to the latest common
    start, and truncate to ``horizon`` steps."""
    if {weather.kind, carbon_intensity.kind, workload.kind} != set(TRACE_KINDS):
        raise TraceError("align needs one series of each kind "
                         f"(got {weather.kind}, {carbon_intensity.kind}, {workload.kind})")
    if horizon < 1:
        raise TraceError("horizon must be >= 1")
    step_s = int(round(step_hours * 3600.0))
    if step_s <= 0:
        raise TraceError("step must be > 0")

    series = (weather, carbon_intensity, workload)
    start = max(ts.start for ts in series)
    end = min(ts.end for ts in series)
    if end < start:
        windows = ", ".join(f"{ts.kind} [{ts.start.isoformat()} .. {ts.end.isoformat()}]"
                            for ts in series)
        raise TraceError(f"traces share no overlapping window: {windows}")

    available = int((end - start).total_seconds()) // step_s + 1
    if available < horizon:
        raise TraceError(f"overlap supports only {available} steps of {step_s} s, "
                         f"requested horizon {horizon}")

    def sample(ts: TimeSeries) -> tuple[float, ...]:
        base = int((start - ts.start).total_seconds())
        return tuple(_interp_at(ts.values, ts.step_seconds, base + k * step_s)
                     for k in range(horizon))

    return AlignedTraces(start=start, step_hours=step_s / 3600.0, horizon=horizon,
                         weather=sample(weather), carbon_intensity=sample(carbon_intensity),
                         workload=sample(workload))


def synth_diurnal(kind: str, mean: float, amplitude: float, period_hours: float,
                  phase_hours: float, step_hours: float, horizon: int, seed: int,
                  noise_std: float = 0.0, start: datetime = SYNTH_START) -> TimeSeries:
    """Seeded sinusoid-plus-noise generator for test scenarios.

    value(t) = mean + amplitude*sin(2*pi*(t - phase)/period) + N(0, noise_std),
    sampled at t = k*step for k < horizon, then clipped to the kind's valid range.
    """
    _check_kind(kind)
    if amplitude < 0:
        raise TraceError("amplitude must be >= 0")
    if horizon < 1:
        raise TraceError("horizon must be >= 1")
    t = np.arange(horizon) * step_hours
    vals = mean + amplitude * np.sin(2.0 * np.pi * (t - phase_hours) / period_hours)
    if noise_std > 0:
        vals = vals + np.random.default_rng(seed).normal(0.0, noise_std, horizon)
    if kind == "workload":
        vals = np.clip(vals, 0.0, 1.0)
    elif kind == "carbon_intensity":
        vals = np.maximum(vals, 0.0)
    return TimeSeries(kind=kind, start=start, step_hours=step_hours,
                      values=tuple(float(v) for v in vals))
