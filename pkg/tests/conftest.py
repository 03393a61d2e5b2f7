import json

import pytest

import dctwin as d


@pytest.fixture
def default_cfg():
    return d.default_config()


@pytest.fixture
def small_cfg():
    """1x2 cabinet room with a cheap step, for enumeration-heavy tests."""
    return d.parse_config(json.dumps({
        "room": {"rows": 1, "cabinets_per_row": 2},
        "loadshift": {"deadline_steps": 2},
    }))


def const_series(kind, value, step_hours, horizon):
    return d.TimeSeries(kind=kind, start=d.traces.SYNTH_START, step_hours=step_hours,
                        values=(value,) * horizon)


def const_traces(step_hours, horizon, weather=20.0, ci=300.0, workload=0.5):
    return d.align(
        const_series("weather", weather, step_hours, horizon),
        const_series("carbon_intensity", ci, step_hours, horizon),
        const_series("workload", workload, step_hours, horizon),
        step_hours, horizon,
    )


def diurnal_traces(step_hours, horizon, seed=0, noise=0.0,
                   weather=(20.0, 10.0, 9.0), ci=(300.0, 150.0, 12.0),
                   workload=(0.6, 0.3, 6.0)):
    """Three phased sines; (mean, amplitude, phase_hours) per channel."""
    w = d.synth_diurnal("weather", weather[0], weather[1], 24.0, weather[2],
                        step_hours, horizon, seed=seed * 3 + 1, noise_std=noise)
    c = d.synth_diurnal("carbon_intensity", ci[0], ci[1], 24.0, ci[2],
                        step_hours, horizon, seed=seed * 3 + 2, noise_std=noise)
    u = d.synth_diurnal("workload", workload[0], workload[1], 24.0, workload[2],
                        step_hours, horizon, seed=seed * 3 + 3,
                        noise_std=noise * 0.001)
    return d.align(w, c, u, step_hours, horizon)


# Benchmark scenario for the directional-comparison criteria: one week at
# hourly steps, zero noise, and a warm-climate mid-efficiency plant whose
# setpoint sensitivity makes HVAC-only optimization visible.
SCENARIO_HOURS = 168

SCENARIO_CONFIG = {
    "timestep_hours": 1.0,
    "hvac": {
        "cop_nominal": 4.5,
        "cop_setpoint_slope": 0.35,
        "cop_ambient_slope": 0.25,
        "cop_min": 1.5,
        "cop_max": 7.0,
    },
}


@pytest.fixture(scope="session")
def week_scenario():
    cfg = d.parse_config(json.dumps(SCENARIO_CONFIG))
    traces = diurnal_traces(1.0, SCENARIO_HOURS, seed=0, noise=0.0)
    return cfg, traces
