"""Fourier-Mellin similarity registration.

Rotation and scale come from phase-correlating log-polar resampled,
high-passed magnitude spectra; translation comes from a second phase
correlation after de-rotating and de-scaling.

Transform convention (centred pixel coordinates, y down, pixel centres at
``i - (N-1)/2``)::

    p_a = scale * R(rotation) @ p_b + (tx, ty)

so ``register(a, apply_similarity(a, t))`` recovers ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from photomap._sampling import bilinear
from photomap.errors import DegenerateInput, SizeMismatch
from photomap.preprocess import Frame

CROSS_POWER_EPS = 1e-12


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    elif a > math.pi:
        a -= 2 * math.pi
    return a


@dataclass(frozen=True)
class SimilarityTransform:
    scale: float = 1.0
    rotation: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not (math.isfinite(self.tx) and math.isfinite(self.ty) and math.isfinite(self.rotation)):
            raise ValueError("transform fields must be finite")
        object.__setattr__(self, "rotation", wrap_angle(self.rotation))

    @classmethod
    def identity(cls) -> SimilarityTransform:
        return cls()

    def inverse(self) -> SimilarityTransform:
        inv = 1.0 / self.scale
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        # R(-theta) = R(theta)^T
        return SimilarityTransform(inv, -self.rotation,
                                   -inv * (c * self.tx + s * self.ty),
                                   -inv * (-s * self.tx + c * self.ty))

    def matrix(self) -> np.ndarray:
        """2x3 affine matrix acting on column vectors (x, y, 1)."""
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        return np.array([[c, -s, self.tx], [s, c, self.ty]])

    def apply(self, x, y):
        m = self.matrix()
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return m[0, 0] * x + m[0, 1] * y + m[0, 2], m[1, 0] * x + m[1, 1] * y + m[1, 2]


@dataclass(frozen=True)
class RegistrationResult:
    transform: SimilarityTransform
    confidence: float


@dataclass(frozen=True)
class FmiConfig:
    """Sampling and gating parameters for :func:`register`.

    ``n_theta``/``n_rho`` of ``None`` mean "same as the frame size".
    ``spectral_sigma`` weights the log-polar correlation (see
    :func:`phase_correlate`); ``None`` gives the plain whitened correlation.
    """

    n_theta: int | None = None
    n_rho: int | None = None
    rho_min: float = 2.0
    confidence_floor: float = 0.12
    max_scale: float = 4.0
    spectral_sigma: float | None = 0.2

    def __post_init__(self):
        if self.n_theta is not None and self.n_theta < 64:
            raise ValueError("n_theta must be >= 64")
        if self.n_rho is not None and self.n_rho < 64:
            raise ValueError("n_rho must be >= 64")
        if not 0.0 <= self.confidence_floor < 1.0:
            raise ValueError("confidence_floor must lie in [0, 1)")
        if self.rho_min <= 0:
            raise ValueError("rho_min must be positive")
        if self.max_scale < 1.0:
            raise ValueError("max_scale must be >= 1")
        if self.spectral_sigma is not None and self.spectral_sigma <= 0:
            raise ValueError("spectral_sigma must be positive or None")

    def resolved(self, size: int) -> tuple[int, int]:
        if not self.rho_min < size / 2 - 1:
            raise ValueError(f"rho_min {self.rho_min} too large for size {size}")
        return (self.n_theta or size, self.n_rho or size)

    def log_base(self, size: int) -> float:
        _, n_rho = self.resolved(size)
        rho_max = size / 2 - 1
        return (rho_max / self.rho_min) ** (1.0 / (n_rho - 1))


def _pixels(f) -> np.ndarray:
    return np.asarray(f.data if isinstance(f, Frame) else f, dtype=np.float64)


def _like(f, arr):
    return Frame(arr, f.source_index) if isinstance(f, Frame) else arr


def hann(n: int) -> np.ndarray:
    i = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * i / (n - 1)))


def apply_hann(f):
    img = _pixels(f)
    w = hann(img.shape[0])
    return _like(f, img * np.outer(w, w))


def fft_magnitude_centered(f) -> np.ndarray:
    return np.abs(np.fft.fftshift(np.fft.fft2(_pixels(f))))


def highpass(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    xi = (np.arange(n) - n // 2) / n
    c = np.outer(np.cos(np.pi * xi), np.cos(np.pi * xi))
    return m * (1.0 - c) * (2.0 - c)


def log_polar(m, cfg: FmiConfig | None = None) -> np.ndarray:
    """Resample a centred spectrum onto an (angle, log-radius) grid.

    Rows are angles ``pi * i / n_theta`` over [0, pi); columns are radii
    ``rho_min * base**j`` up to ``size/2 - 1``.
    """
    m = np.asarray(m, dtype=np.float64)
    cfg = cfg or FmiConfig()
    size = m.shape[0]
    n_theta, n_rho = cfg.resolved(size)
    base = cfg.log_base(size)
    theta = np.pi * np.arange(n_theta) / n_theta
    rho = np.minimum(cfg.rho_min * base ** np.arange(n_rho), size / 2 - 1)
    c = size // 2
    x = c + rho[None, :] * np.cos(theta)[:, None]
    y = c + rho[None, :] * np.sin(theta)[:, None]
    out, _ = bilinear(m, x, y)
    return out


def _parabolic(left, mid, right):
    denom = left - 2.0 * mid + right
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def _wrap_offset(d, n):
    if d > n / 2:
        d -= n
    elif d <= -n / 2:
        d += n
    return d


def phase_correlate(a, b, sigma=None):
    """Phase-only correlation of two equal-shape rasters.

    Returns ``(dx, dy, peak)`` such that ``b`` is ``a`` moved by ``(dx, dy)``
    (``b(p) ~ a(p - d)``), with sub-sample parabolic refinement.

    ``sigma`` (cycles/sample) optionally weights the whitened cross-power
    spectrum with a Gaussian, widening the peak so the parabolic fit does not
    lock onto whole samples.  The fit then runs on log values.
    """
    a = _pixels(a)
    b = _pixels(b)
    if a.shape != b.shape:
        raise SizeMismatch(f"{a.shape} vs {b.shape}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateInput("degenerate input: constant raster")
    cross = np.fft.fft2(a) * np.conj(np.fft.fft2(b))
    mod = np.abs(cross)
    keep = mod >= CROSS_POWER_EPS
    if not keep.any():
        raise DegenerateInput("degenerate input: empty cross-power spectrum")
    cross = np.where(keep, cross / np.where(keep, mod, 1.0), 0.0)
    if sigma:
        fy = np.fft.fftfreq(a.shape[0])[:, None]
        fx = np.fft.fftfreq(a.shape[1])[None, :]
        cross = cross * np.exp(-(fx * fx + fy * fy) / (2.0 * sigma * sigma))
    # b = a shifted by d puts the peak of ifft(conj) at -d; flip it
    corr = np.real(np.fft.ifft2(np.conj(cross)))
    h, w = corr.shape
    iy, ix = np.unravel_index(int(np.argmax(corr)), corr.shape)
    peak = corr[iy, ix]
    row = corr[iy, [(ix - 1) % w, ix, (ix + 1) % w]]
    col = corr[[(iy - 1) % h, iy, (iy + 1) % h], ix]
    if sigma:
        # the weighted peak is near-Gaussian, so fit the parabola to its log
        row = np.log(np.maximum(row, 1e-12 * peak))
        col = np.log(np.maximum(col, 1e-12 * peak))
    fx = _parabolic(*row)
    fy = _parabolic(*col)
    dx = _wrap_offset(ix + fx, w)
    dy = _wrap_offset(iy + fy, h)
    return float(dx), float(dy), float(np.clip(peak, 0.0, 1.0))


def warp_coords(n: int, t: SimilarityTransform):
    """Source pixel positions for every output pixel of an n x n warp by ``t``."""
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    sx, sy = t.apply(xx - c, yy - c)
    return sx + c, sy + c


def apply_similarity(f, t: SimilarityTransform):
    """Resample so that ``out(p) = in(t(p))`` in centred coordinates."""
    img = _pixels(f)
    if t == SimilarityTransform.identity():
        return _like(f, img.copy())
    sx, sy = warp_coords(img.shape[0], t)
    out, _ = bilinear(img, sx, sy)
    return _like(f, np.clip(out, 0.0, 1.0))


def _log_polar_spectrum(img, cfg):
    return log_polar(highpass(fft_magnitude_centered(apply_hann(img))), cfg)


def rotation_scale(a, b, cfg: FmiConfig | None = None) -> tuple[float, float, float]:
    """Rotation (mod pi, in (-pi/2, pi/2]) and scale of ``b`` relative to ``a``.

    Also returns the log-polar correlation peak.
    """
    cfg = cfg or FmiConfig()
    size = a.shape[0]
    n_theta, _ = cfg.resolved(size)
    base = cfg.log_base(size)
    la = _log_polar_spectrum(a, cfg)
    lb = _log_polar_spectrum(b, cfg)
    d_rho, d_theta, peak = phase_correlate(la, lb, cfg.spectral_sigma)
    theta = -d_theta * np.pi / n_theta
    scale = base ** d_rho
    scale = float(np.clip(scale, 1.0 / cfg.max_scale, cfg.max_scale))
    return float(theta), scale, peak


def register(a, b, cfg: FmiConfig | None = None) -> RegistrationResult:
    """Estimate the similarity mapping ``b``'s centred pixels onto ``a``'s."""
    a = _pixels(a)
    b = _pixels(b)
    if a.shape != b.shape:
        raise SizeMismatch(f"frame sizes differ: {a.shape} vs {b.shape}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateInput("degenerate input: constant frame")
    cfg = cfg or FmiConfig()
    theta, scale, _ = rotation_scale(a, b, cfg)
    wa = apply_hann(a)
    best = None
    # magnitude spectra only fix rotation mod pi; try both and keep the better match
    for rot in (theta, theta + np.pi):
        undo = SimilarityTransform(scale, rot).inverse()
        aligned = apply_similarity(b, undo)
        if np.ptp(aligned) == 0:
            continue
        dx, dy, peak = phase_correlate(wa, apply_hann(aligned))
        if best is None or peak > best[0]:
            best = (peak, rot, -dx, -dy)
    if best is None:
        raise DegenerateInput("degenerate input: nothing left after warping")
    peak, rot, tx, ty = best
    return RegistrationResult(SimilarityTransform(scale, rot, tx, ty), peak)
