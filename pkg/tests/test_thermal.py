import json

import numpy as np
import pytest

import dctwin as d
from dctwin.thermal import AIR_SPECIFIC_HEAT


def uniform_cfg(offset=0.0):
    """2x4 room with identical inlet offsets."""
    return d.parse_config(json.dumps({
        "room": {"rows": 2, "cabinets_per_row": 4,
                 "cabinets": [{"inlet_offset": offset} for _ in range(8)]},
    }))


def test_fan_ratio_knees(default_cfg):
    spec = default_cfg.server
    assert d.fan_ratio(18.0, spec) == pytest.approx(0.3, abs=1e-12)
    assert d.fan_ratio(27.0, spec) == pytest.approx(1.0, abs=1e-12)
    assert d.fan_ratio(22.5, spec) == pytest.approx(0.65, abs=1e-12)
    # clamps outside the ramp
    assert d.fan_ratio(5.0, spec) == spec.fan_min_ratio
    assert d.fan_ratio(40.0, spec) == 1.0


def test_fan_ratio_monotone(default_cfg):
    spec = default_cfg.server
    temps = np.sort(np.random.default_rng(0).uniform(0.0, 50.0, 1000))
    ratios = [d.fan_ratio(t, spec) for t in temps]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


def test_server_power_examples(default_cfg):
    spec = default_cfg.server
    cpu, fan = d.server_power(0.0, 18.0, spec)
    assert cpu == 100.0
    assert fan == pytest.approx(25 * 0.3 ** 3, abs=1e-12)
    cpu, fan = d.server_power(1.0, 27.0, spec)
    assert cpu == 300.0
    assert fan == pytest.approx(25.0, abs=1e-12)
    cpu, fan = d.server_power(0.5, 22.5, spec)
    assert cpu == 200.0
    assert fan == pytest.approx(25 * 0.65 ** 3, abs=1e-12)


def test_server_power_domain(default_cfg):
    with pytest.raises(ValueError):
        d.server_power(-0.01, 20.0, default_cfg.server)
    with pytest.raises(ValueError):
        d.server_power(1.01, 20.0, default_cfg.server)


def test_cpu_power_affine_in_utilization(default_cfg):
    spec = default_cfg.server
    points = [d.server_power(u, 20.0, spec)[0] for u in (0.0, 0.5, 1.0)]
    assert points[1] - points[0] == pytest.approx(points[2] - points[1], rel=1e-12)
    assert points[0] < points[1] < points[2]


def test_room_step_idle_default(default_cfg):
    result = d.room_step(default_cfg, 18.0, 0.0)
    assert result.cpu_power == 160 * 100.0
    # independent oracle: sum the fan law over the documented offset ramp
    expected_fan = sum(
        20 * 25.0 * d.fan_ratio(18.0 + off, default_cfg.server) ** 3
        for off in np.linspace(0.0, 4.0, 8))
    assert result.fan_power == pytest.approx(expected_fan, rel=1e-12)


def test_room_step_idle_uniform_offsets():
    # with all inlets at the setpoint every fan runs at the 0.3 floor
    result = d.room_step(uniform_cfg(0.0), 18.0, 0.0)
    assert result.cpu_power == 16000.0
    assert result.fan_power == pytest.approx(160 * 25 * 0.3 ** 3, rel=1e-12)  # ~108 W


def test_room_step_single_cabinet_chain():
    cfg = d.parse_config(json.dumps({
        "room": {"rows": 1, "cabinets_per_row": 1,
                 "cabinets": [{"server_count": 1, "inlet_offset": 2.0,
                               "airflow_ref": 1.0}]},
    }))
    result = d.room_step(cfg, 18.0, 1.0)
    # independent scalar chain
    t_in = 20.0
    ratio = 0.3 + 0.7 * (t_in - 18.0) / 9.0
    q = 300.0 + 25.0 * ratio ** 3
    t_out = t_in + q / (ratio * 1.0 * AIR_SPECIFIC_HEAT)
    assert result.inlet_temps == (20.0,)
    assert result.it_power == pytest.approx(q, rel=1e-12)
    assert result.outlet_temps[0] == pytest.approx(t_out, rel=1e-12)
    assert result.outlet_temps[0] == pytest.approx(20.66, abs=0.01)


def test_room_step_return_temp_above_setpoint(default_cfg):
    result = d.room_step(default_cfg, 20.0, 0.7)
    assert result.return_temp > 20.0
    assert min(result.outlet_temps) <= result.return_temp <= max(result.outlet_temps)


def test_room_step_ordering_invariants(default_cfg):
    for sp in (18.0, 22.0, 27.0):
        for u in (0.0, 0.4, 1.0):
            r = d.room_step(default_cfg, sp, u)
            assert all(o >= i for o, i in zip(r.outlet_temps, r.inlet_temps))
            assert min(r.inlet_temps) >= sp
            assert r.it_power == r.cpu_power + r.fan_power
            assert 0.0 < r.crac_flow_ratio <= 1.0


def test_room_step_monotone_in_u_and_setpoint(default_cfg):
    powers_u = [d.room_step(default_cfg, 22.0, u).it_power
                for u in np.linspace(0, 1, 21)]
    assert all(b >= a for a, b in zip(powers_u, powers_u[1:]))
    powers_sp = [d.room_step(default_cfg, sp, 0.5).it_power
                 for sp in np.linspace(18, 27, 19)]
    assert all(b >= a for a, b in zip(powers_sp, powers_sp[1:]))


def test_room_step_energy_accounting(default_cfg):
    r = d.room_step(default_cfg, 21.0, 0.6)
    # every cabinet's heat reconstructed from its air stream matches the
    # electrical total: nothing vanishes between power and temperature
    q_sum = 0.0
    for i, cab in enumerate(default_cfg.room.cabinets):
        ratio = d.fan_ratio(r.inlet_temps[i], default_cfg.server)
        m_dot = ratio * cab.airflow_ref
        q_sum += (r.outlet_temps[i] - r.inlet_temps[i]) * m_dot * AIR_SPECIFIC_HEAT
    assert q_sum == pytest.approx(r.it_power, rel=1e-12)


def test_room_step_setpoint_out_of_range(default_cfg):
    with pytest.raises(ValueError):
        d.room_step(default_cfg, 17.0, 0.5)


def test_hotspot_grid_shape_and_content(default_cfg):
    r = d.room_step(default_cfg, 19.0, 0.5)
    grid = d.hotspot_grid(default_cfg, r)
    assert (grid.rows, grid.cols) == (2, 4)
    assert grid.inlet == r.inlet_temps
    assert grid.outlet == r.outlet_temps
    assert min(grid.inlet) == 19.0  # setpoint + smallest offset (0)


def test_hotspot_grid_uniform_offsets_constant():
    cfg = uniform_cfg(1.5)
    grid = d.hotspot_grid(cfg, d.room_step(cfg, 20.0, 0.3))
    assert len(set(grid.inlet)) == 1
    assert grid.inlet[0] == 21.5


def test_hotspot_grid_length_mismatch(default_cfg):
    other = d.room_step(uniform_cfg(0.0), 20.0, 0.5)
    bad = d.parse_config('{"room":{"rows":1,"cabinets_per_row":3}}')
    with pytest.raises(ValueError):
        d.hotspot_grid(bad, other)
