"""Run configuration: ``key=value`` files plus ``--set key=value`` overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from photomap.flightsim import CameraModel
from photomap.mosaic import BLEND_POLICIES
from photomap.preprocess import MIN_FRAME_SIZE, CalibrationParams
from photomap.registration import FmiConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    frame_size: int = 256
    # registration
    n_theta: int | None = None
    n_rho: int | None = None
    rho_min: float = 2.0
    confidence_floor: float = 0.12
    max_scale: float = 4.0
    spectral_sigma: float | None = 0.2
    # canvas
    tile_size: int = 256
    blend_policy: str = "feather"
    # calibration
    calib_enabled: bool = False
    calib_k1: float = 0.0
    calib_k2: float = 0.0
    calib_cx: float = 0.5
    calib_cy: float = 0.5
    # simulator
    capture_interval: float = 1.0
    duration: float = 20.0
    noise_sigma: float = 0.0
    altitude: float = 20.0
    start_x: float = 0.0
    start_y: float = 0.0
    start_yaw: float = 0.0
    fov: float = math.radians(60.0)
    tau: float = 2.0
    meters_per_texel: float = 0.1
    background: float = 0.5

    def __post_init__(self):
        n = self.frame_size
        if n < MIN_FRAME_SIZE or n & (n - 1):
            raise ConfigError(f"frame_size must be a power of two >= {MIN_FRAME_SIZE}")
        if self.tile_size <= 0 or self.tile_size & (self.tile_size - 1):
            raise ConfigError("tile_size must be a power of two")
        if self.blend_policy not in BLEND_POLICIES:
            raise ConfigError(f"blend_policy must be one of {', '.join(BLEND_POLICIES)}")
        if self.capture_interval <= 0 or self.duration < 0:
            raise ConfigError("capture_interval must be > 0 and duration >= 0")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.altitude <= 0 or self.tau <= 0 or self.meters_per_texel <= 0:
            raise ConfigError("altitude, tau and meters_per_texel must be positive")
        if not 0.0 <= self.background <= 1.0:
            raise ConfigError("background must lie in [0, 1]")
        try:
            self.fmi().resolved(n)
            self.camera()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def fmi(self) -> FmiConfig:
        return FmiConfig(self.n_theta, self.n_rho, self.rho_min, self.confidence_floor,
                         self.max_scale, self.spectral_sigma)

    def calibration(self) -> CalibrationParams:
        return CalibrationParams(self.calib_enabled, self.calib_k1, self.calib_k2,
                                 (self.calib_cx, self.calib_cy))

    def camera(self) -> CameraModel:
        return CameraModel(self.fov, self.frame_size)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
_NONE = {"none", "auto", ""}


def _convert(name: str, type_: str, raw: str):
    raw = raw.strip()
    optional = "None" in type_
    if optional and raw.lower() in _NONE:
        return None
    try:
        if type_.startswith("bool"):
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(raw)
        if type_.startswith("int"):
            return int(raw)
        if type_.startswith("float"):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_assignments(lines, base: RunConfig | None = None) -> RunConfig:
    """Apply ``key=value`` lines to ``base``; unknown keys are an error."""
    types = {f.name: str(f.type) for f in fields(RunConfig)}
    updates = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        updates[key] = _convert(key, types[key], value)
    return dataclasses.replace(base or RunConfig(), **updates)


def load_config(path=None, overrides=()) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        cfg = parse_assignments(text.splitlines(), cfg)
    return parse_assignments(list(overrides), cfg)
