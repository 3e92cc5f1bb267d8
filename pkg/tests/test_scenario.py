"""Scenario file parsing, override plumbing, and sweep specs."""

import pytest

from mpolsr.scenario import (
    ScenarioConfig,
    ScenarioError,
    SETTABLE_KEYS,
    apply_overrides,
    config_echo,
    parse_scenario,
    parse_sweep,
)

GOOD = """
# comment lines and blanks are ignored
protocol = re_mpolsr
node_count = 20
area.width = 800
area.height = 600
speed.min = 1
speed.max = 5        # trailing comments too
duration = 40
traffic.packet_interval = 0.5
mdc.m = 2
mdc.n = 4
"""


# --- scenario text ---

def test_parse_scenario_reads_every_section():
    cfg = parse_scenario(GOOD)
    assert cfg.protocol == "RE_MPOLSR"
    assert cfg.node_count == 20
    assert cfg.area == (800.0, 600.0)
    assert cfg.speed == (1.0, 5.0)
    assert cfg.duration == 40.0
    assert cfg.traffic.packet_interval == 0.5
    assert (cfg.mdc.m, cfg.mdc.n) == (2, 4)

def test_unknown_key_rejected_with_line_number():
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario("\nwarp_speed = 9\n")

def test_malformed_line_rejected():
    with pytest.raises(ScenarioError, match="expected 'key = value'"):
        parse_scenario("protocol re_mpolsr")

def test_bad_value_type_rejected():
    with pytest.raises(ScenarioError, match="node_count"):
        parse_scenario("node_count = many")

def test_validation_catches_inconsistent_config():
    cfg = parse_scenario("speed.min = 7\nspeed.max = 2")
    with pytest.raises(ScenarioError):
        cfg.validate()
    # mdc section is policed only when the protocol actually uses it
    parse_scenario("mdc.m = 5\nmdc.n = 3").validate()
    with pytest.raises(ScenarioError, match="mdc.n"):
        parse_scenario(
            "protocol = mdc_mpolsr\nmdc.m = 5\nmdc.n = 3"
        ).validate()

def test_unknown_protocol_rejected_on_validate():
    cfg = parse_scenario("protocol = ospf")
    with pytest.raises(ScenarioError, match="protocol"):
        cfg.validate()


# --- overrides ---

def test_overrides_apply_in_order():
    cfg = ScenarioConfig()
    apply_overrides(cfg, ["duration=30", "duration=60", "seed=9"])
    assert cfg.duration == 60.0
    assert cfg.seed == 9

def test_override_requires_equals_sign():
    with pytest.raises(ScenarioError):
        apply_overrides(ScenarioConfig(), ["duration"])

# scenario-file key -> flat CSV column name
ECHO_NAMES = {
    "area.width": "area_width",
    "area.height": "area_height",
    "speed.min": "speed_min",
    "speed.max": "speed_max",
    "traffic.n_sources": "n_sources",
    "traffic.packet_interval": "packet_interval",
    "traffic.payload_bytes": "payload_bytes",
    "mdc.m": "mdc_m",
    "mdc.n": "mdc_n",
    "mdc.allocation": "mdc_allocation",
    "mdc.flush_timeout": "mdc_flush_timeout",
}

def test_every_settable_key_round_trips_through_echo():
    # the echo is the CSV config prefix; anything settable must show up
    echo = config_echo(ScenarioConfig())
    for key in SETTABLE_KEYS:
        assert ECHO_NAMES.get(key, key) in echo, key


# --- sweeps ---

SWEEP = """
sweep.parameter = speed.max
sweep.values = 2, 4, 6
sweep.seeds = 1 2
sweep.protocols = olsr, re_mpolsr
duration = 20
"""

def test_sweep_run_grid_order_is_value_seed_protocol():
    spec = parse_sweep(SWEEP)
    runs = list(spec.runs())
    assert len(runs) == 3 * 2 * 2
    assert [(v, s, p) for p, v, s, _ in runs][:5] == [
        ("2", 1, "OLSR"), ("2", 1, "RE_MPOLSR"),
        ("2", 2, "OLSR"), ("2", 2, "RE_MPOLSR"),
        ("4", 1, "OLSR"),
    ]

def test_sweep_configs_are_independent_copies():
    runs = list(parse_sweep(SWEEP).runs())
    runs[0][3].traffic.packet_interval = 99.0
    assert runs[1][3].traffic.packet_interval != 99.0

def test_sweep_applies_parameter_and_base_keys():
    for protocol, value, seed, cfg in parse_sweep(SWEEP).runs():
        assert cfg.duration == 20.0
        assert cfg.speed[1] == float(value)
        assert cfg.seed == seed
        assert cfg.protocol == protocol

def test_sweep_missing_parameter_rejected():
    with pytest.raises(ScenarioError, match="sweep.parameter"):
        parse_sweep("sweep.values = 1\nsweep.seeds = 1")

def test_sweep_rejects_value_invalid_for_the_key():
    bad = "sweep.parameter = node_count\nsweep.values = 10, soup\n" \
          "sweep.seeds = 1"
    with pytest.raises(ScenarioError, match="node_count"):
        parse_sweep(bad)

def test_sweep_rejects_unknown_protocol():
    bad = "sweep.parameter = duration\nsweep.values = 10\n" \
          "sweep.seeds = 1\nsweep.protocols = rip"
    with pytest.raises(ScenarioError, match="protocol"):
        parse_sweep(bad)
