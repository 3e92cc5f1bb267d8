"""Scenario configuration: dataclasses, file parsing, and overrides.

Scenario files are flat ``key = value`` lines with ``#`` comments.  Keys
use dotted lower-case names (``traffic.packet_interval = 0.25``).  The
same key space is accepted by command-line ``--set`` overrides, so one
parser serves both.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

VARIANTS = ("OLSR", "OLSR_FB", "SR_MPOLSR", "RE_MPOLSR", "MDC_MPOLSR")
ALLOCATIONS = ("static", "buffer")


class ScenarioError(ValueError):
    """Invalid scenario value; the message names the offending key."""


@dataclass
class TrafficConfig:
    n_sources: int = 30
    packet_interval: float = 0.25
    payload_bytes: int = 512


@dataclass
class MdcConfig:
    m: int = 2
    n: int = 4
    allocation: str = "static"
    # None defers to the simulator, which sizes the window so a block
    # filled at the CBR rate never flushes early.
    flush_timeout: float | None = None


@dataclass
class ScenarioConfig:
    protocol: str = "OLSR"
    node_count: int = 50
    area: tuple[float, float] = (1000.0, 1000.0)
    radio_range: float = 250.0
    speed: tuple[float, float] = (1.0, 2.0)
    pause_time: float = 2.0
    duration: float = 100.0
    warmup: float = 30.0
    cooldown: float = 2.0
    seed: int = 1
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    mdc: MdcConfig = field(default_factory=MdcConfig)
    n_paths: int = 3
    cost_transform: str = "double"
    max_hops: int = 64
    max_recoveries: int = 64
    queue_capacity: int = 50
    link_bandwidth: float = 100.0
    mac_retries: int = 7
    hello_interval: float = 2.0
    tc_interval: float = 5.0
    tc_min_interval: float = 0.5
    hold_multiplier: float = 3.0
    mobility_step: float = 0.25
    # Programmatic hooks, not reachable from scenario files: pin nodes to
    # coordinates, teleport them mid-run, or fix the traffic pairs.
    placements: dict[int, tuple[float, float]] | None = None
    script: tuple[tuple[float, int, float, float], ...] = ()
    flows: tuple[tuple[int, int], ...] | None = None

    def validate(self) -> None:
        if self.protocol not in VARIANTS:
            raise ScenarioError(
                f"protocol: {self.protocol!r} is not one of {', '.join(VARIANTS)}"
            )
        _positive("node_count", self.node_count)
        if self.node_count < 2:
            raise ScenarioError("node_count: need at least 2 nodes")
        _positive("area.width", self.area[0])
        _positive("area.height", self.area[1])
        _positive("radio_range", self.radio_range)
        lo, hi = self.speed
        if lo < 0 or hi < lo:
            raise ScenarioError("speed: need 0 <= min <= max")
        _non_negative("pause_time", self.pause_time)
        _positive("duration", self.duration)
        _non_negative("warmup", self.warmup)
        _non_negative("cooldown", self.cooldown)
        if self.warmup + self.cooldown >= self.duration:
            raise ScenarioError("warmup: warmup + cooldown must be < duration")
        _positive("traffic.n_sources", self.traffic.n_sources)
        if self.flows is None and self.traffic.n_sources > self.node_count:
            raise ScenarioError("traffic.n_sources: more sources than nodes")
        _positive("traffic.packet_interval", self.traffic.packet_interval)
        _positive("traffic.payload_bytes", self.traffic.payload_bytes)
        if self.traffic.payload_bytes > 65535:
            raise ScenarioError("traffic.payload_bytes: must be <= 65535")
        _positive("n_paths", self.n_paths)
        if self.cost_transform not in ("identity", "double", "triple"):
            raise ScenarioError(f"cost_transform: unknown preset {self.cost_transform!r}")
        _positive("max_hops", self.max_hops)
        _non_negative("max_recoveries", self.max_recoveries)
        _positive("queue_capacity", self.queue_capacity)
        _positive("link_bandwidth", self.link_bandwidth)
        _positive("mac_retries", self.mac_retries)
        _positive("hello_interval", self.hello_interval)
        _positive("tc_interval", self.tc_interval)
        _positive("tc_min_interval", self.tc_min_interval)
        if self.hold_multiplier < 1.0:
            raise ScenarioError("hold_multiplier: must be >= 1")
        _positive("mobility_step", self.mobility_step)
        if self.protocol == "MDC_MPOLSR":
            if self.mdc.m < 1:
                raise ScenarioError("mdc.m: must be >= 1")
            if self.mdc.n < self.mdc.m:
                raise ScenarioError("mdc.n: must be >= mdc.m")
            if self.mdc.allocation not in ALLOCATIONS:
                raise ScenarioError(
                    f"mdc.allocation: {self.mdc.allocation!r} is not one of"
                    f" {', '.join(ALLOCATIONS)}"
                )
            if self.mdc.flush_timeout is not None and self.mdc.flush_timeout <= 0:
                raise ScenarioError("mdc.flush_timeout: must be > 0")
        if self.flows is not None:
            for src, dst in self.flows:
                if not (0 <= src < self.node_count and 0 <= dst < self.node_count):
                    raise ScenarioError(f"flows: node {src}->{dst} out of range")
                if src == dst:
                    raise ScenarioError(f"flows: source equals destination ({src})")


def _positive(key: str, value) -> None:
    if not value > 0:
        raise ScenarioError(f"{key}: must be > 0, got {value!r}")


def _non_negative(key: str, value) -> None:
    if value < 0:
        raise ScenarioError(f"{key}: must be >= 0, got {value!r}")


def _to_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"{key}: expected an integer, got {raw!r}") from None


def _to_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"{key}: expected a number, got {raw!r}") from None


def _set_area(cfg, idx, key, raw):
    area = list(cfg.area)
    area[idx] = _to_float(key, raw)
    cfg.area = (area[0], area[1])


def _set_speed(cfg, idx, key, raw):
    speed = list(cfg.speed)
    speed[idx] = _to_float(key, raw)
    cfg.speed = (speed[0], speed[1])


# key -> setter(config, raw_string); additions here show up in both the
# scenario file format and --set.
_SETTERS = {
    "protocol": lambda c, r: setattr(c, "protocol", r.strip().upper()),
    "node_count": lambda c, r: setattr(c, "node_count", _to_int("node_count", r)),
    "area.width": lambda c, r: _set_area(c, 0, "area.width", r),
    "area.height": lambda c, r: _set_area(c, 1, "area.height", r),
    "radio_range": lambda c, r: setattr(c, "radio_range", _to_float("radio_range", r)),
    "speed.min": lambda c, r: _set_speed(c, 0, "speed.min", r),
    "speed.max": lambda c, r: _set_speed(c, 1, "speed.max", r),
    "pause_time": lambda c, r: setattr(c, "pause_time", _to_float("pause_time", r)),
    "duration": lambda c, r: setattr(c, "duration", _to_float("duration", r)),
    "warmup": lambda c, r: setattr(c, "warmup", _to_float("warmup", r)),
    "cooldown": lambda c, r: setattr(c, "cooldown", _to_float("cooldown", r)),
    "seed": lambda c, r: setattr(c, "seed", _to_int("seed", r)),
    "traffic.n_sources": lambda c, r: setattr(
        c.traffic, "n_sources", _to_int("traffic.n_sources", r)
    ),
    "traffic.packet_interval": lambda c, r: setattr(
        c.traffic, "packet_interval", _to_float("traffic.packet_interval", r)
    ),
    "traffic.payload_bytes": lambda c, r: setattr(
        c.traffic, "payload_bytes", _to_int("traffic.payload_bytes", r)
    ),
    "mdc.m": lambda c, r: setattr(c.mdc, "m", _to_int("mdc.m", r)),
    "mdc.n": lambda c, r: setattr(c.mdc, "n", _to_int("mdc.n", r)),
    "mdc.allocation": lambda c, r: setattr(c.mdc, "allocation", r.strip()),
    "mdc.flush_timeout": lambda c, r: setattr(
        c.mdc, "flush_timeout", _to_float("mdc.flush_timeout", r)
    ),
    "n_paths": lambda c, r: setattr(c, "n_paths", _to_int("n_paths", r)),
    "cost_transform": lambda c, r: setattr(c, "cost_transform", r.strip()),
    "max_hops": lambda c, r: setattr(c, "max_hops", _to_int("max_hops", r)),
    "max_recoveries": lambda c, r: setattr(
        c, "max_recoveries", _to_int("max_recoveries", r)
    ),
    "queue_capacity": lambda c, r: setattr(
        c, "queue_capacity", _to_int("queue_capacity", r)
    ),
    "mac_retries": lambda c, r: setattr(
        c, "mac_retries", _to_int("mac_retries", r)
    ),
    "link_bandwidth": lambda c, r: setattr(
        c, "link_bandwidth", _to_float("link_bandwidth", r)
    ),
    "hello_interval": lambda c, r: setattr(
        c, "hello_interval", _to_float("hello_interval", r)
    ),
    "tc_interval": lambda c, r: setattr(c, "tc_interval", _to_float("tc_interval", r)),
    "tc_min_interval": lambda c, r: setattr(
        c, "tc_min_interval", _to_float("tc_min_interval", r)
    ),
    "hold_multiplier": lambda c, r: setattr(
        c, "hold_multiplier", _to_float("hold_multiplier", r)
    ),
    "mobility_step": lambda c, r: setattr(
        c, "mobility_step", _to_float("mobility_step", r)
    ),
}

SETTABLE_KEYS = tuple(sorted(_SETTERS))


def set_value(config: ScenarioConfig, key: str, raw: str) -> None:
    key = key.strip()
    setter = _SETTERS.get(key)
    if setter is None:
        raise ScenarioError(f"{key}: unknown scenario key")
    setter(config, raw.strip())


def apply_overrides(config: ScenarioConfig, overrides: list[str]) -> None:
    """Apply ``key=value`` strings in order."""
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(f"{item!r}: overrides must look like key=value")
        key, _, raw = item.partition("=")
        set_value(config, key, raw)


def parse_scenario(text: str) -> ScenarioConfig:
    config = ScenarioConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        try:
            set_value(config, key, raw)
        except ScenarioError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from None
    return config


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def config_echo(config: ScenarioConfig) -> dict[str, object]:
    """Flat view of the settable fields, used when reporting results."""
    return {
        "protocol": config.protocol,
        "node_count": config.node_count,
        "area_width": config.area[0],
        "area_height": config.area[1],
        "radio_range": config.radio_range,
        "speed_min": config.speed[0],
        "speed_max": config.speed[1],
        "pause_time": config.pause_time,
        "mobility_step": config.mobility_step,
        "duration": config.duration,
        "warmup": config.warmup,
        "cooldown": config.cooldown,
        "seed": config.seed,
        "n_sources": config.traffic.n_sources,
        "packet_interval": config.traffic.packet_interval,
        "payload_bytes": config.traffic.payload_bytes,
        "n_paths": config.n_paths,
        "cost_transform": config.cost_transform,
        "max_hops": config.max_hops,
        "max_recoveries": config.max_recoveries,
        "queue_capacity": config.queue_capacity,
        "link_bandwidth": config.link_bandwidth,
        "mac_retries": config.mac_retries,
        "hello_interval": config.hello_interval,
        "tc_interval": config.tc_interval,
        "tc_min_interval": config.tc_min_interval,
        "hold_multiplier": config.hold_multiplier,
        "mdc_m": config.mdc.m,
        "mdc_n": config.mdc.n,
        "mdc_allocation": config.mdc.allocation,
        "mdc_flush_timeout": config.mdc.flush_timeout,
    }


@dataclass
class SweepSpec:
    """A one-axis parameter sweep crossed with seeds and protocols."""

    scenario: ScenarioConfig
    parameter: str
    values: tuple[str, ...]
    seeds: tuple[int, ...]
    protocols: tuple[str, ...]

    def runs(self):
        """Yield (protocol, value, seed, config) in report row order."""
        for value in self.values:
            for seed in self.seeds:
                for protocol in self.protocols:
                    cfg = replace(
                        self.scenario,
                        traffic=replace(self.scenario.traffic),
                        mdc=replace(self.scenario.mdc),
                    )
                    set_value(cfg, self.parameter, value)
                    cfg.seed = seed
                    cfg.protocol = protocol
                    yield protocol, value, seed, cfg


def parse_sweep(text: str, base: ScenarioConfig | None = None) -> SweepSpec:
    """Sweep files reuse the scenario key space plus four directives:

    ``sweep.parameter``, ``sweep.values``, ``sweep.seeds`` and the
    optional ``sweep.protocols`` (defaults to the base protocol).
    """
    scenario = base if base is not None else ScenarioConfig()
    parameter = None
    values: tuple[str, ...] = ()
    seeds: tuple[int, ...] = ()
    protocols: tuple[str, ...] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            if key == "sweep.parameter":
                parameter = raw
            elif key == "sweep.values":
                values = tuple(raw.replace(",", " ").split())
            elif key == "sweep.seeds":
                seeds = tuple(
                    _to_int("sweep.seeds", tok)
                    for tok in raw.replace(",", " ").split()
                )
            elif key == "sweep.protocols":
                protocols = tuple(
                    tok.upper() for tok in raw.replace(",", " ").split()
                )
            else:
                set_value(scenario, key, raw)
        except ScenarioError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from None
    if parameter is None:
        raise ScenarioError("sweep.parameter: missing")
    if parameter not in _SETTERS:
        raise ScenarioError(f"sweep.parameter: unknown scenario key {parameter!r}")
    if not values:
        raise ScenarioError("sweep.values: missing or empty")
    if not seeds:
        raise ScenarioError("sweep.seeds: missing or empty")
    if protocols is None:
        protocols = (scenario.protocol,)
    for proto in protocols:
        if proto not in VARIANTS:
            raise ScenarioError(f"sweep.protocols: unknown protocol {proto!r}")
    # fail early if any value is malformed for the target key
    for value in values:
        probe = replace(scenario, traffic=replace(scenario.traffic), mdc=replace(scenario.mdc))
        set_value(probe, parameter, value)
    return SweepSpec(scenario, parameter, values, seeds, protocols)


def load_sweep(path: str) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep(fh.read())
