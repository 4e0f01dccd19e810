"""Run configuration: one strict JSON document drives a whole run.

The document has exactly seven entries: ``arena``, ``noise``,
``trajectory``, ``superframe``, ``channel``, ``clock``, and ``seed``.
Unknown keys anywhere are rejected, every quantity is SI, and all
randomness derives from the single integer seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, UwbError
from .ranging import ClockModel
from .rf import ChannelParams
from .sim import ArenaConfig, NoiseModel, Rect, Trajectory
from .tdma import Schedule, SuperframeConfig, build_schedule

_SECTIONS = ("arena", "noise", "trajectory", "superframe", "channel", "clock", "seed")

_ARENA_KEYS = ("width_m", "height_m", "anchors", "obstacles", "tag_height_m")
_NOISE_KEYS = ("mode", "los_mean_m", "los_sigma_m", "nlos_mean_m", "nlos_sigma_m")
_TRAJECTORY_KEYS = ("waypoints", "max_speed_mps")
_SUPERFRAME_KEYS = ("superframe_s", "slots_per_superframe", "update_rate_hz", "n_tags")
_CHANNEL_KEYS = (
    "carrier_frequency_hz",
    "bandwidth_hz",
    "tx_power_w",
    "tx_gain_linear",
    "rx_gain_linear",
    "path_loss_coeff_L",
    "freq_loss_factor_F",
)
_CLOCK_KEYS = ("drift_ppm", "sync_offset_s", "sigma_tof_s")
_OBSTACLE_KEYS = ("x_min", "y_min", "x_max", "y_max")

_MAX_SEED = 2**64 - 1


def _require_mapping(doc, key: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(key, f"must be a JSON object, got {type(doc).__name__}")
    return doc

def _reject_unknown(section: dict, allowed, where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}", "unknown key")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"must be a number, got {value!r}")
    return float(value)


def _parse_arena(section: dict) -> ArenaConfig:
    _reject_unknown(section, _ARENA_KEYS, "arena")
    kwargs = {}
    for key in ("width_m", "height_m", "tag_height_m"):
        if key in section:
            kwargs[key] = _number(section[key], f"arena.{key}")
    if "anchors" in section:
        anchors = section["anchors"]
        if not isinstance(anchors, list) or not anchors:
            raise ConfigError("arena.anchors", "must be a non-empty list of [x, y]")
        parsed = []
        for i, entry in enumerate(anchors):
            if not isinstance(entry, list) or len(entry) != 2:
                raise ConfigError(f"arena.anchors[{i}]", "must be a [x, y] pair")
            parsed.append(
                [
                    _number(entry[0], f"arena.anchors[{i}][0]"),
                    _number(entry[1], f"arena.anchors[{i}][1]"),
                ]
            )
        kwargs["anchors"] = parsed
    if "obstacles" in section:
        obstacles = section["obstacles"]
        if not isinstance(obstacles, list):
            raise ConfigError("arena.obstacles", "must be a list of rectangles")
        rects = []
        for i, entry in enumerate(obstacles):
            where = f"arena.obstacles[{i}]"
            entry = _require_mapping(entry, where)
            _reject_unknown(entry, _OBSTACLE_KEYS, where)
            missing = [k for k in _OBSTACLE_KEYS if k not in entry]
            if missing:
                raise ConfigError(f"{where}.{missing[0]}", "missing required key")
            rects.append(
                Rect(
                    x_min=_number(entry["x_min"], f"{where}.x_min"),
                    y_min=_number(entry["y_min"], f"{where}.y_min"),
                    x_max=_number(entry["x_max"], f"{where}.x_max"),
                    y_max=_number(entry["y_max"], f"{where}.y_max"),
                )
            )
        kwargs["obstacles"] = tuple(rects)
    try:
        return ArenaConfig(**kwargs)
    except UwbError as err:
        raise ConfigError("arena", str(err)) from err


def _parse_noise(section: dict) -> NoiseModel:
    _reject_unknown(section, _NOISE_KEYS, "noise")
    kwargs = {}
    if "mode" in section:
        if not isinstance(section["mode"], str):
            raise ConfigError("noise.mode", "must be a string")
        kwargs["mode"] = section["mode"]
    for key in _NOISE_KEYS[1:]:
        if key in section:
            kwargs[key] = _number(section[key], f"noise.{key}")
    try:
        return NoiseModel(**kwargs)
    except UwbError as err:
        raise ConfigError("noise", str(err)) from err


def _parse_trajectory(section: dict) -> Trajectory:
    _reject_unknown(section, _TRAJECTORY_KEYS, "trajectory")
    if "waypoints" not in section:
        raise ConfigError("trajectory.waypoints", "missing required key")
    raw = section["waypoints"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError(
            "trajectory.waypoints", "must be a non-empty list of [t, x, y]"
        )
    waypoints = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ConfigError(
                f"trajectory.waypoints[{i}]", "must be a [t, x, y] triple"
            )
        t = _number(entry[0], f"trajectory.waypoints[{i}][0]")
        x = _number(entry[1], f"trajectory.waypoints[{i}][1]")
        y = _number(entry[2], f"trajectory.waypoints[{i}][2]")
        waypoints.append((t, (x, y)))
    kwargs = {"waypoints": tuple(waypoints)}
    if "max_speed_mps" in section:
        kwargs["max_speed_mps"] = _number(
            section["max_speed_mps"], "trajectory.max_speed_mps"
        )
    try:
        return Trajectory(**kwargs)
    except UwbError as err:
        raise ConfigError("trajectory", str(err)) from err


def _parse_superframe(section: dict):
    _reject_unknown(section, _SUPERFRAME_KEYS, "superframe")
    kwargs = {}
    if "superframe_s" in section:
        kwargs["superframe_s"] = _number(section["superframe_s"], "superframe.superframe_s")
    if "slots_per_superframe" in section:
        value = section["slots_per_superframe"]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("superframe.slots_per_superframe", "must be an integer")
        kwargs["slots_per_superframe"] = value
    try:
        cfg = SuperframeConfig(**kwargs)
    except UwbError as err:
        raise ConfigError("superframe", str(err)) from err
    update_rate_hz = 10.0
    if "update_rate_hz" in section:
        update_rate_hz = _number(section["update_rate_hz"], "superframe.update_rate_hz")
    n_tags = 1
    if "n_tags" in section:
        value = section["n_tags"]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError("superframe.n_tags", "must be a positive integer")
        n_tags = value
    return cfg, update_rate_hz, n_tags


def _parse_channel(section: dict) -> ChannelParams:
    _reject_unknown(section, _CHANNEL_KEYS, "channel")
    kwargs = {
        key: _number(section[key], f"channel.{key}") for key in section
    }
    try:
        return ChannelParams(**kwargs)
    except UwbError as err:
        raise ConfigError("channel", str(err)) from err


def _parse_clock(section: dict) -> ClockModel:
    _reject_unknown(section, _CLOCK_KEYS, "clock")
    kwargs = {
        key: _number(section[key], f"clock.{key}") for key in section
    }
    try:
        return ClockModel(**kwargs)
    except UwbError as err:
        raise ConfigError("clock", str(err)) from err


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of one run-configuration document."""

    arena: ArenaConfig
    noise: NoiseModel
    trajectory: Trajectory
    superframe: SuperframeConfig
    update_rate_hz: float
    n_tags: int
    channel: ChannelParams
    clock: ClockModel
    seed: int

    @classmethod
    def from_dict(cls, doc) -> "RunConfig":
        doc = _require_mapping(doc, "<document>")
        for key in doc:
            if key not in _SECTIONS:
                raise ConfigError(key, "unknown section")
        for key in _SECTIONS:
            if key not in doc:
                raise ConfigError(key, "missing required section")
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("seed", f"must be an integer, got {seed!r}")
        if not 0 <= seed <= _MAX_SEED:
            raise ConfigError("seed", "must fit an unsigned 64-bit integer")
        superframe, update_rate_hz, n_tags = _parse_superframe(
            _require_mapping(doc["superframe"], "superframe")
        )
        return cls(
            arena=_parse_arena(_require_mapping(doc["arena"], "arena")),
            noise=_parse_noise(_require_mapping(doc["noise"], "noise")),
            trajectory=_parse_trajectory(
                _require_mapping(doc["trajectory"], "trajectory")
            ),
            superframe=superframe,
            update_rate_hz=update_rate_hz,
            n_tags=n_tags,
            channel=_parse_channel(_require_mapping(doc["channel"], "channel")),
            clock=_parse_clock(_require_mapping(doc["clock"], "clock")),
            seed=seed,
        )

    @classmethod
    def from_json_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError("<document>", f"invalid JSON: {err}") from err
        return cls.from_dict(doc)

    def build_schedule(self) -> Schedule:
        return build_schedule(
            self.n_tags,
            self.update_rate_hz,
            self.superframe,
            n_anchors=self.arena.anchors.shape[0],
        )


PRESET_NAMES = ("los_baseline", "los_reference", "nlos_wall")


def preset_path(name: str) -> Path:
    """Filesystem path of a bundled configuration by bare name."""
    clean = name[:-5] if name.endswith(".json") else name
    if clean not in PRESET_NAMES:
        raise ConfigError(
            "<config>", f"unknown preset {name!r}; bundled: {', '.join(PRESET_NAMES)}"
        )
    return Path(resources.files("uwb_rtls.presets") / f"{clean}.json")


def resolve_config_path(value: str) -> Path:
    """Interpret a --config value as a file path or bundled preset name."""
    path = Path(value)
    if path.exists():
        return path
    if "/" not in value and "\\" not in value:
        return preset_path(value)
    raise FileNotFoundError(f"no such config file: {value}")
