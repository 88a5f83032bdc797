"""Scenario configuration: flat ``key = value`` text with dotted sections.

Example::

    routing = opar
    duration = 100
    velocity = 15
    channel.noise_power = 4e-11
    mac.retry_limit = 5

Unknown keys are rejected. Anything not given takes its default, which
reproduces the reference experiment setup (15 UAVs, 600 x 600 x 100 m,
CSMA/CA, 2 Mbps, Poisson traffic at 5 packets/s).
"""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, field, fields

from .channel import ChannelParams
from .energy import EnergyParams
from .geometry import Bounds
from .kernel import seconds
from .mac import MacParams
from .mobility import MobilityParams

ROUTING_PROTOCOLS = ("greedy", "dsdv", "opar", "q_routing")
MOTION_DRIVERS = ("gauss_markov", "random_walk", "random_waypoint", "virtual_force", "static")
REQUIRED = ("routing", "duration")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class MapConfig:
    x: float = 600.0
    y: float = 600.0
    z: float = 100.0


@dataclass(frozen=True)
class TrafficConfig:
    model: str = "poisson"  # poisson | uniform
    rate: float = 5.0       # packets/s per source
    sources: int = 0        # 0: every UAV generates traffic


@dataclass(frozen=True)
class PacketConfig:
    payload_bytes: int = 1024
    ip_header_bytes: int = 20
    mac_header_bytes: int = 14
    phy_header_bytes: int = 24
    ack_bytes: int = 30

    @property
    def data_frame_bytes(self) -> int:
        return self.payload_bytes + self.ip_header_bytes + self.mac_header_bytes + self.phy_header_bytes


@dataclass(frozen=True)
class MacConfig:
    protocol: str = "csma_ca"
    slot: float = 20e-6
    sifs: float = 10e-6
    difs: float = 50e-6
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 5
    ack_timeout: typing.Optional[float] = None
    aloha_max_backoff: float = 30e-3
    queue_capacity: int = 100
    ack_enabled: bool = True
    immediate_access: bool = False

    def params(self) -> MacParams:
        return MacParams(
            protocol=self.protocol, slot=seconds(self.slot), sifs=seconds(self.sifs),
            difs=seconds(self.difs), cw_min=self.cw_min, cw_max=self.cw_max,
            retry_limit=self.retry_limit,
            ack_timeout=None if self.ack_timeout is None else seconds(self.ack_timeout),
            aloha_max_backoff=seconds(self.aloha_max_backoff), queue_capacity=self.queue_capacity,
            ack_enabled=self.ack_enabled, immediate_access=self.immediate_access)


@dataclass(frozen=True)
class MobilityConfig:
    update_interval: float = 0.1
    alpha: float = 0.85
    speed_sigma: float = 1.0
    direction_sigma: float = 0.1
    pitch_sigma: float = 0.05
    pitch_range: float = math.pi / 18
    speed_min: typing.Optional[float] = None
    speed_max: typing.Optional[float] = None
    waypoint_arrival_radius: float = 1.0
    pause_time: float = 0.0
    boundary: str = "reflect"


@dataclass(frozen=True)
class TopologyConfig:
    desired_distance: typing.Optional[float] = None  # None: 0.7 x communication range
    spring_gain: float = 1.0
    gain: float = 0.05
    max_step_speed: float = 10.0
    control_interval: float = 0.5
    interaction_radius: typing.Optional[float] = None  # None: communication range


@dataclass(frozen=True)
class RoutingConfig:
    hello_interval: float = 0.5
    neighbor_ttl: typing.Optional[float] = None  # None: 2.5 x hello_interval
    hello_bytes: int = 50
    advert_base_bytes: int = 50
    advert_entry_bytes: int = 12
    dsdv_dump_interval: float = 1.0
    dsdv_trigger_delay: float = 0.02
    q_learning_rate: float = 0.5
    q_epsilon: float = 0.05
    opar_hop_time: float = 0.05
    ttl: int = 15

    @property
    def ttl_ns(self) -> int:
        ttl = 2.5 * self.hello_interval if self.neighbor_ttl is None else self.neighbor_ttl
        return seconds(ttl)


@dataclass(frozen=True)
class TraceConfig:
    enabled: bool = False
    position_interval: float = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    routing: str = "greedy"
    duration: float = 100.0
    n_uavs: int = 15
    velocity: float = 10.0
    motion: str = "gauss_markov"
    seed: int = 1
    replications: int = 1
    map: MapConfig = field(default_factory=MapConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    packet: PacketConfig = field(default_factory=PacketConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    mac: MacConfig = field(default_factory=MacConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    routing_params: RoutingConfig = field(default_factory=RoutingConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    trace: TraceConfig = field(default_factory=TraceConfig)

    @property
    def bounds(self) -> Bounds:
        return Bounds(self.map.x, self.map.y, self.map.z)

    def mobility_params(self) -> MobilityParams:
        m = self.mobility
        model = self.motion if self.motion in ("gauss_markov", "random_walk", "random_waypoint") else "gauss_markov"
        if model == "gauss_markov":
            lo = 0.0 if m.speed_min is None else m.speed_min
            hi = math.inf if m.speed_max is None else m.speed_max
        else:
            lo = self.velocity if m.speed_min is None else m.speed_min
            hi = self.velocity if m.speed_max is None else m.speed_max
        return MobilityParams(
            model=model, update_interval=m.update_interval, alpha=m.alpha, mean_speed=self.velocity,
            speed_sigma=m.speed_sigma, direction_sigma=m.direction_sigma, pitch_sigma=m.pitch_sigma,
            speed_min=lo, speed_max=hi, pitch_range=m.pitch_range,
            waypoint_arrival_radius=m.waypoint_arrival_radius, pause_time=m.pause_time,
            bounds=self.bounds, boundary=m.boundary)


# section prefix in the text format -> attribute on ScenarioConfig
SECTIONS = {
    "map": "map", "traffic": "traffic", "packet": "packet", "channel": "channel", "mac": "mac",
    "mobility": "mobility", "topology": "topology", "routing": "routing_params",
    "energy": "energy", "trace": "trace",
}
_TOP = ("routing", "duration", "n_uavs", "velocity", "motion", "seed", "replications")

_CHOICES = {
    "routing": ROUTING_PROTOCOLS,
    "motion": MOTION_DRIVERS,
    "traffic.model": ("poisson", "uniform"),
    "mac.protocol": ("csma_ca", "aloha"),
    "mobility.boundary": ("reflect", "clamp"),
}
_NONNEG = {"duration", "velocity", "traffic.rate", "traffic.sources", "mobility.pause_time",
           "mobility.speed_min", "mobility.speed_max", "routing.dsdv_trigger_delay",
           "routing.q_epsilon", "mac.cw_min", "mac.retry_limit", "routing.hello_interval",
           "mobility.speed_sigma", "mobility.direction_sigma", "mobility.pitch_sigma"}
_POSITIVE = {"n_uavs", "replications", "map.x", "map.y", "map.z", "mobility.update_interval",
             "topology.control_interval", "topology.max_step_speed", "routing.dsdv_dump_interval",
             "routing.opar_hop_time", "routing.ttl", "trace.position_interval", "mac.queue_capacity",
             "packet.payload_bytes", "packet.ack_bytes", "routing.hello_bytes"}


def _section_types(cls) -> dict[str, typing.Any]:
    return typing.get_type_hints(cls)


def _coerce(key: str, raw: str, tp):
    text = raw.strip()
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if text.lower() in ("none", "auto", ""):
            return None
        tp = args[0]
    try:
        if tp is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(text)
        if tp is int:
            f = float(text)
            if not f.is_integer():
                raise ValueError(text)
            return int(f)
        if tp is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(key, f"expected {tp.__name__}, got {raw!r}") from None


def _parse_lines(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected 'key = value', got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in out:
            raise ConfigError(k, "duplicate key")
        out[k] = v
    return out


def _check(key: str, value):
    if value is None:
        return
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(key, f"must be one of {', '.join(_CHOICES[key])}, got {value!r}")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if math.isnan(value):
            raise ConfigError(key, "NaN is not allowed")
        if key in _NONNEG and value < 0:
            raise ConfigError(key, f"must be >= 0, got {value}")
        if key in _POSITIVE and value <= 0:
            raise ConfigError(key, f"must be > 0, got {value}")


def parse_config(text: str, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Parse and validate scenario text; defaults fill every missing key."""
    kv = _parse_lines(text)
    if overrides:
        kv.update({k: str(v) for k, v in overrides.items()})
    missing = [k for k in REQUIRED if k not in kv]
    if missing:
        raise ConfigError(missing[0], "required key is missing")

    top_types = _section_types(ScenarioConfig)
    top: dict[str, typing.Any] = {}
    sections: dict[str, dict[str, typing.Any]] = {}
    for key, raw in kv.items():
        if key in _TOP:
            value = _coerce(key, raw, top_types[key])
            _check(key, value)
            top[key] = value
            continue
        prefix, _, name = key.partition(".")
        attr = SECTIONS.get(prefix)
        if attr is None or not name:
            raise ConfigError(key, "unknown key")
        types = _section_types(type(getattr(ScenarioConfig(), attr)))
        if name not in types:
            raise ConfigError(key, "unknown key")
        value = _coerce(key, raw, types[name])
        _check(key, value)
        sections.setdefault(attr, {})[name] = value

    base = ScenarioConfig()
    built = {}
    for attr, values in sections.items():
        try:
            built[attr] = dataclasses.replace(getattr(base, attr), **values)
        except ValueError as exc:
            prefix = next(p for p, a in SECTIONS.items() if a == attr)
            raise ConfigError(prefix, str(exc)) from None
    cfg = dataclasses.replace(base, **top, **built)
    if cfg.mac.cw_min > cfg.mac.cw_max:
        raise ConfigError("mac.cw_min", "must not exceed mac.cw_max")
    return cfg


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_items(cfg: ScenarioConfig) -> list[tuple[str, str]]:
    items = [(k, _fmt(getattr(cfg, k))) for k in _TOP]
    for prefix, attr in SECTIONS.items():
        sec = getattr(cfg, attr)
        for f in fields(sec):
            items.append((f"{prefix}.{f.name}", _fmt(getattr(sec, f.name))))
    return items


def dump_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_items(cfg))
