"""Kinematic blimp simulator with a nadir camera over a textured ground plane.

The three actuator channels follow a first-order lag toward their commanded
values, which is what makes the simulated flight smooth.  Unit choices:

* ``xz_angle`` is an angle in radians (tilt of the thrust vector; pi/2 is
  straight up), not a rate.
* ``tail`` is a yaw rate in rad/s.
* ``thrust`` is a speed in m/s along the tilted thrust vector.

World coordinates are metres with the origin at the texture centre, x along
texture columns and y along texture rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from photomap._sampling import bilinear
from photomap.errors import InvalidDt
from photomap.preprocess import RawImage
from photomap.registration import SimilarityTransform, wrap_angle

MAX_XZ_ANGLE = math.pi / 2
MAX_THRUST = 5.0
MAX_TAIL = 1.0
DEFAULT_TAU = 2.0
Z_MIN = 0.5
MAX_DT = 0.5
SIM_DT = 0.02


@dataclass(frozen=True)
class BlimpState:
    x: float = 0.0
    y: float = 0.0
    z: float = 20.0
    yaw: float = 0.0
    v_thrust: float = 0.0
    v_yaw: float = 0.0
    xz_angle: float = 0.0
    cmd_thrust: float = 0.0
    cmd_tail: float = 0.0
    cmd_xz_angle: float = 0.0

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError("altitude must be positive")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))


@dataclass(frozen=True)
class CameraModel:
    fov: float = math.radians(60.0)
    image_size: int = 256

    def __post_init__(self):
        if not 0 < self.fov < math.pi:
            raise ValueError("fov must lie in (0, pi)")

    def meters_per_pixel(self, z: float) -> float:
        return 2.0 * z * math.tan(self.fov / 2.0) / self.image_size


@dataclass(frozen=True, eq=False)
class GroundWorld:
    texture: np.ndarray
    meters_per_texel: float = 0.1
    background: float = 0.5

    def __post_init__(self):
        if self.meters_per_texel <= 0:
            raise ValueError("meters_per_texel must be positive")
        object.__setattr__(self, "texture", np.asarray(self.texture, dtype=np.float64))

    @property
    def extent(self) -> tuple[float, float]:
        h, w = self.texture.shape
        return w * self.meters_per_texel, h * self.meters_per_texel


def _clamp(v, lim):
    return max(-lim, min(lim, float(v)))


def set_motor_speeds(state: BlimpState, xz_angle: float, thrust: float, tail: float) -> BlimpState:
    """Latch new commands (clamped to the actuator limits); actuals are untouched."""
    return replace(state,
                   cmd_xz_angle=_clamp(xz_angle, MAX_XZ_ANGLE),
                   cmd_thrust=_clamp(thrust, MAX_THRUST),
                   cmd_tail=_clamp(tail, MAX_TAIL))


def lag(actual: float, command: float, dt: float, tau: float = DEFAULT_TAU) -> float:
    return actual + (command - actual) * -math.expm1(-dt / tau)


def step(state: BlimpState, dt: float, tau: float = DEFAULT_TAU, z_min: float = Z_MIN) -> BlimpState:
    if not 0 < dt <= MAX_DT:
        raise InvalidDt(f"dt must lie in (0, {MAX_DT}], got {dt}")
    v = lag(state.v_thrust, state.cmd_thrust, dt, tau)
    w = lag(state.v_yaw, state.cmd_tail, dt, tau)
    a = lag(state.xz_angle, state.cmd_xz_angle, dt, tau)
    forward = v * math.cos(a)
    climb = v * math.sin(a)
    return replace(
        state,
        x=state.x + forward * math.cos(state.yaw) * dt,
        y=state.y + forward * math.sin(state.yaw) * dt,
        z=max(z_min, state.z + climb * dt),
        yaw=wrap_angle(state.yaw + w * dt),
        v_thrust=v, v_yaw=w, xz_angle=a,
    )


def render_view(world: GroundWorld, state: BlimpState, cam: CameraModel) -> RawImage:
    """Nadir view: pixel p (centred, y down) sees ground point pos + m(z) R(yaw) p."""
    n = cam.image_size
    m = cam.meters_per_pixel(state.z)
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    px, py = xx - c, yy - c
    cy, sy = math.cos(state.yaw), math.sin(state.yaw)
    wx = state.x + m * (cy * px - sy * py)
    wy = state.y + m * (sy * px + cy * py)
    th, tw = world.texture.shape
    col = wx / world.meters_per_texel + (tw - 1) / 2.0
    row = wy / world.meters_per_texel + (th - 1) / 2.0
    out, _ = bilinear(world.texture, col, row, fill=world.background)
    return RawImage(np.clip(out, 0.0, 1.0))


def ground_truth_transform(a: BlimpState, b: BlimpState, cam: CameraModel) -> SimilarityTransform:
    """Similarity taking view-b centred pixels to view-a centred pixels."""
    m_a = cam.meters_per_pixel(a.z)
    dx, dy = b.x - a.x, b.y - a.y
    c, s = math.cos(a.yaw), math.sin(a.yaw)
    return SimilarityTransform(
        b.z / a.z,
        wrap_angle(b.yaw - a.yaw),
        (c * dx + s * dy) / m_a,
        (-s * dx + c * dy) / m_a,
    )


class ScriptError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Command:
    t: float
    xz_angle: float
    thrust: float
    tail: float


def parse_commands(text: str) -> list[Command]:
    """Parse ``t xz_angle thrust tail`` lines; '#' starts a comment."""
    commands: list[Command] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ScriptError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ScriptError(f"non-numeric field in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ScriptError("non-finite value", lineno)
        if vals[0] < 0 or (commands and vals[0] <= commands[-1].t):
            raise ScriptError("times must be non-negative and strictly increasing", lineno)
        commands.append(Command(*vals))
    return commands


@dataclass
class Capture:
    time: float
    state: BlimpState
    image: RawImage


def simulate(world: GroundWorld, commands: list[Command], cam: CameraModel,
             duration: float, capture_interval: float = 1.0,
             initial: BlimpState | None = None, dt: float = SIM_DT,
             tau: float = DEFAULT_TAU, noise_sigma: float = 0.0,
             seed: int | None = None) -> list[Capture]:
    """Fly the command schedule and capture a view every ``capture_interval``.

    Captures start at t=0 and include t=duration when it falls on the
    schedule.  Time is tracked in integer steps so the schedule is exact.
    """
    per_capture = round(capture_interval / dt)
    if per_capture < 1 or not math.isclose(per_capture * dt, capture_interval, rel_tol=1e-9):
        raise ValueError("capture_interval must be a multiple of dt")
    n_steps = round(duration / dt)
    starts = [math.ceil(c.t / dt - 1e-9) for c in commands]
    rng = np.random.default_rng(seed) if noise_sigma > 0 else None

    state = initial or BlimpState()
    captures = []
    nxt = 0
    for k in range(n_steps + 1):
        while nxt < len(commands) and starts[nxt] <= k:
            c = commands[nxt]
            state = set_motor_speeds(state, c.xz_angle, c.thrust, c.tail)
            nxt += 1
        if k % per_capture == 0:
            img = render_view(world, state, cam)
            if rng is not None:
                noisy = img.data + rng.normal(0.0, noise_sigma, img.data.shape)
                img = RawImage(np.clip(noisy, 0.0, 1.0))
            captures.append(Capture(k * dt, state, img))
        if k < n_steps:
            state = step(state, dt, tau)
    return captures


def make_texture(shape, seed: int = 0, slope: float = 1.2, fine: float = 0.2) -> np.ndarray:
    """Seeded 1/f^slope noise in [0, 1] plus a little white detail.

    The white component keeps enough high-frequency content for phase
    correlation; the power-law part gives large-scale structure.
    """
    if isinstance(shape, int):
        shape = (shape, shape)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(shape)
    fy = np.fft.fftfreq(shape[0])[:, None]
    fx = np.fft.fftfreq(shape[1])[None, :]
    r = np.hypot(fy, fx)
    r[0, 0] = 1.0
    img = np.real(np.fft.ifft2(np.fft.fft2(noise) / r ** slope))
    img = (img - img.mean()) / img.std()
    img = img + fine * rng.standard_normal(shape)
    img = (img - img.min()) / np.ptp(img)
    return img
