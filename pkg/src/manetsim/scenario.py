"""Experiment configuration: defaults, key=value parsing, sweep grids.

The default configuration is the reference setup: 50 nodes on a
1000x1000 m area, 250 m range at 2 Mbps, random waypoint at 5-10 m/s with
100 s pauses, 10 CBR connections of 512-byte packets at 4 pkt/s over
600 s, 1000 J initial energy with 1.4 W transmit / 1.0 W receive power,
and a 0.06 s route-selection wait time.
"""

import dataclasses
from dataclasses import dataclass

PROTOCOLS = ("MEA-DSR", "DSR")

SPEED_CLASSES = {
    "low": (0.5, 1.0),
    "medium": (5.0, 10.0),
    "high": (20.0, 25.0),
}

SWEEP_AXES = ("pause", "speed_class", "density", "rate", "sessions", "wt")

DEFAULT_POINTS = {
    "pause": [0.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0],
    "speed_class": ["low", "medium", "high"],
    "density": [50, 60, 70, 80, 90, 100],
    "rate": [2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
    "sessions": [10, 15, 20, 25, 30, 35, 40],
    "wt": [0.01, 0.06, 0.2],
}

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    n_nodes: int = 50
    area_width: float = 1000.0
    area_height: float = 1000.0
    range_m: float = 250.0
    bitrate: float = 2_000_000.0
    speed_min: float = 5.0
    speed_max: float = 10.0
    pause: float = 100.0
    sim_end: float = 600.0
    n_connections: int = 10
    pkt_rate: float = 4.0
    pkt_size: int = 512
    tx_power: float = 1.4
    rx_power: float = 1.0
    initial_energy: float = 1000.0
    wt: float = 0.06
    protocol: str = "MEA-DSR"
    seed: int = 1

    def validate(self) -> "ScenarioConfig":
        positive = ("n_nodes", "area_width", "area_height", "range_m", "bitrate",
                    "speed_min", "speed_max", "sim_end", "n_connections",
                    "pkt_rate", "pkt_size", "tx_power", "rx_power",
                    "initial_energy", "wt")
        for key in positive:
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be > 0, got {getattr(self, key)}")
        if self.pause < 0:
            raise ConfigError(f"pause must be >= 0, got {self.pause}")
        if self.speed_min > self.speed_max:
            raise ConfigError(
                f"speed_min {self.speed_min} exceeds speed_max {self.speed_max}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.n_connections > self.n_nodes * (self.n_nodes - 1):
            raise ConfigError("more connections than distinct node pairs")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        return self


_INT_FIELDS = {"n_nodes", "n_connections", "pkt_size", "seed"}
_FIELD_NAMES = [f.name for f in dataclasses.fields(ScenarioConfig)]


def parse_config(text: str) -> ScenarioConfig:
    """Parse the flat key=value format; missing keys take the defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key == "protocol":
            values[key] = val
        elif key in _INT_FIELDS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from None
        else:
            try:
                values[key] = float(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be a number") from None
    return ScenarioConfig(**values).validate()


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    for name in _FIELD_NAMES:
        value = getattr(cfg, name)
        lines.append(f"{name}={value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path) as f:
        return parse_config(f.read())


def apply_axis(base: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """New config with one sweep-axis point applied."""
    if axis == "pause":
        return dataclasses.replace(base, pause=float(value))
    if axis == "speed_class":
        vmin, vmax = SPEED_CLASSES[value]
        return dataclasses.replace(base, speed_min=vmin, speed_max=vmax)
    if axis == "density":
        return dataclasses.replace(base, n_nodes=int(value))
    if axis == "rate":
        return dataclasses.replace(base, pkt_rate=float(value))
    if axis == "sessions":
        return dataclasses.replace(base, n_connections=int(value))
    if axis == "wt":
        return dataclasses.replace(base, wt=float(value))
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def sweep_grid(base: ScenarioConfig, axis: str, points=None,
               seeds=DEFAULT_SEEDS, protocols=PROTOCOLS) -> list[ScenarioConfig]:
    """One config per (point, protocol, seed), point-major order."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if points is None:
        points = DEFAULT_POINTS[axis]
    out = []
    for point in points:
        cfg_point = apply_axis(base, axis, point)
        for protocol in protocols:
            for seed in seeds:
                out.append(dataclasses.replace(cfg_point, protocol=protocol,
                                               seed=seed).validate())
    return out
