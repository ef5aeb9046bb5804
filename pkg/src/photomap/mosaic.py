"""Growing photomap: pose chaining, sparse tile canvas, dirty regions.

Map coordinates are the first accepted frame's centred pixel coordinates.
Map pixel ``(X, Y)`` covers ``[X, X+1) x [Y, Y+1)``, so a frame composited at
the identity pose lands exactly on the integer grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from photomap._sampling import bilinear
from photomap.errors import DegenerateInput, EmptyCanvas, EmptySequence, ScaleOutOfRange
from photomap.imageio import write_gray
from photomap.preprocess import Frame
from photomap.registration import FmiConfig, SimilarityTransform, register, wrap_angle
from photomap.trajectory import TrajectoryRecord

log = logging.getLogger(__name__)

# a pose in the map frame is just a similarity into map coordinates
MapPose = SimilarityTransform

MAX_COMPOSED_SCALE = 64.0
BLEND_POLICIES = ("overwrite", "feather")


def compose(parent: SimilarityTransform, rel: SimilarityTransform) -> SimilarityTransform:
    """``parent o rel``: map rel's source frame through rel, then through parent."""
    s = parent.scale * rel.scale
    if not 1.0 / MAX_COMPOSED_SCALE <= s <= MAX_COMPOSED_SCALE:
        raise ScaleOutOfRange(f"composed scale {s:g} outside [1/64, 64]")
    tx, ty = parent.apply(rel.tx, rel.ty)
    return SimilarityTransform(s, wrap_angle(parent.rotation + rel.rotation), float(tx), float(ty))


def invert(t: SimilarityTransform) -> SimilarityTransform:
    return t.inverse()


@dataclass(frozen=True)
class DirtyRegion:
    """Inclusive map-pixel bounds changed by one composite."""

    min_x: int
    min_y: int
    max_x: int
    max_y: int
    tiles: tuple[tuple[int, int], ...] = ()

    @property
    def width(self) -> int:
        return self.max_x - self.min_x + 1

    @property
    def height(self) -> int:
        return self.max_y - self.min_y + 1


@dataclass
class Tile:
    value: np.ndarray
    weight: np.ndarray
    written: np.ndarray

    @classmethod
    def empty(cls, n: int) -> Tile:
        return cls(np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n), dtype=bool))


@dataclass
class MapCanvas:
    """Sparse store of ``tile_size`` square tiles keyed by tile (column, row)."""

    tile_size: int = 256
    blend_policy: str = "feather"
    tiles: dict[tuple[int, int], Tile] = field(default_factory=dict)
    frame_count: int = 0

    def __post_init__(self):
        if self.tile_size <= 0 or self.tile_size & (self.tile_size - 1):
            raise ValueError("tile_size must be a power of two")
        if self.blend_policy not in BLEND_POLICIES:
            raise ValueError(f"blend_policy must be one of {BLEND_POLICIES}")

    def bounds(self):
        """Inclusive (min_x, min_y, max_x, max_y) of written pixels, or None."""
        ts = self.tile_size
        lo_x = lo_y = math.inf
        hi_x = hi_y = -math.inf
        for (i, j), tile in self.tiles.items():
            rows = np.flatnonzero(tile.written.any(axis=1))
            cols = np.flatnonzero(tile.written.any(axis=0))
            lo_x = min(lo_x, i * ts + cols[0])
            hi_x = max(hi_x, i * ts + cols[-1])
            lo_y = min(lo_y, j * ts + rows[0])
            hi_y = max(hi_y, j * ts + rows[-1])
        if lo_x is math.inf:
            return None
        return int(lo_x), int(lo_y), int(hi_x), int(hi_y)


def footprint(size: int, pose: SimilarityTransform) -> tuple[int, int, int, int]:
    """Pixel bounding box of a frame's warped outline, grown by one pixel."""
    h = size / 2.0
    xs, ys = pose.apply(np.array([-h, h, h, -h]), np.array([-h, -h, h, h]))
    return (math.floor(xs.min()) - 1, math.floor(ys.min()) - 1,
            math.ceil(xs.max()), math.ceil(ys.max()))


def _edge_weight(ix, iy, n):
    d = np.minimum(np.minimum(ix, iy), np.minimum(n - 1 - ix, n - 1 - iy))
    return np.clip(d / ((n - 1) / 2.0), 0.0, 1.0)


def composite(canvas: MapCanvas, frame: Frame, pose: SimilarityTransform) -> DirtyRegion:
    """Draw ``frame`` at ``pose``; only tiles under its footprint are touched."""
    n = frame.size
    x0, y0, x1, y1 = footprint(n, pose)
    c = (n - 1) / 2.0
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    mx, my = np.meshgrid(xs, ys)
    px, py = invert(pose).apply(mx, my)
    fx, fy = px + c, py + c
    values, inside = bilinear(frame.data, fx, fy)
    if canvas.blend_policy == "feather":
        weights = _edge_weight(fx, fy, n)

    ts = canvas.tile_size
    touched = []
    for j in range(y0 // ts, y1 // ts + 1):
        for i in range(x0 // ts, x1 // ts + 1):
            # overlap of tile (i, j) with the footprint, in map pixels
            ax, bx = max(x0, i * ts), min(x1, i * ts + ts - 1)
            ay, by = max(y0, j * ts), min(y1, j * ts + ts - 1)
            src = (slice(ay - y0, by - y0 + 1), slice(ax - x0, bx - x0 + 1))
            mask = inside[src]
            if not mask.any():
                continue
            tile = canvas.tiles.get((i, j))
            if tile is None:
                tile = canvas.tiles[(i, j)] = Tile.empty(ts)
            dst = (slice(ay - j * ts, by - j * ts + 1), slice(ax - i * ts, bx - i * ts + 1))
            val = tile.value[dst]
            wt = tile.weight[dst]
            new = values[src]
            if canvas.blend_policy == "overwrite":
                val[mask] = new[mask]
                wt[mask] = 1.0
            else:
                w_new = weights[src]
                w_old = np.where(tile.written[dst], wt, 0.0)
                total = w_old + w_new
                blended = np.where(total > 0, (val * w_old + new * w_new) / np.where(total > 0, total, 1.0), new)
                val[mask] = blended[mask]
                wt[mask] = np.maximum(w_old, w_new)[mask]
            tile.written[dst] |= mask
            touched.append((i, j))
    canvas.frame_count += 1
    return DirtyRegion(x0, y0, x1, y1, tuple(touched))


@dataclass(frozen=True)
class MapExport:
    raster: np.ndarray
    mask: np.ndarray
    origin_x: int
    origin_y: int

    @property
    def width(self) -> int:
        return self.raster.shape[1]

    @property
    def height(self) -> int:
        return self.raster.shape[0]


def export(canvas: MapCanvas) -> MapExport:
    """Tight raster over all written pixels; ``origin`` is its top-left corner."""
    b = canvas.bounds()
    if b is None:
        raise EmptyCanvas("canvas has no written pixels")
    lo_x, lo_y, hi_x, hi_y = b
    ts = canvas.tile_size
    raster = np.zeros((hi_y - lo_y + 1, hi_x - lo_x + 1))
    mask = np.zeros(raster.shape, dtype=bool)
    for (i, j), tile in canvas.tiles.items():
        oy, ox = j * ts - lo_y, i * ts - lo_x
        # tile may extend past the tight bounds on any side
        sy0, sx0 = max(0, -oy), max(0, -ox)
        sy1 = min(ts, raster.shape[0] - oy)
        sx1 = min(ts, raster.shape[1] - ox)
        if sy1 <= sy0 or sx1 <= sx0:
            continue
        region = (slice(oy + sy0, oy + sy1), slice(ox + sx0, ox + sx1))
        w = tile.written[sy0:sy1, sx0:sx1]
        raster[region] = np.where(w, tile.value[sy0:sy1, sx0:sx1], 0.0)
        mask[region] = w
    return MapExport(raster, mask, lo_x, lo_y)


def build_map(frames: Iterable[Frame], cfg: FmiConfig | None = None, tile_size: int = 256,
              blend_policy: str = "feather") -> tuple[MapCanvas, list[TrajectoryRecord]]:
    """Chain frame-to-previous-accepted registrations into a composited map.

    Frames whose confidence falls below ``cfg.confidence_floor`` (or that are
    degenerate) are logged as rejected and do not move the anchor.
    """
    cfg = cfg or FmiConfig()
    canvas = MapCanvas(tile_size, blend_policy)
    records: list[TrajectoryRecord] = []
    anchor = anchor_pose = None
    for k, frame in enumerate(frames):
        if anchor is None:
            pose = SimilarityTransform.identity()
            if np.ptp(frame.data) == 0:
                # no anchor yet: a blank first frame cannot seed the map
                records.append(TrajectoryRecord(k, pose, 0.0, False))
                continue
            composite(canvas, frame, pose)
            records.append(TrajectoryRecord(k, pose, 1.0, True))
            anchor, anchor_pose = frame, pose
            continue
        try:
            result = register(anchor.data, frame.data, cfg)
        except DegenerateInput:
            log.info("frame %d rejected: degenerate input", k)
            records.append(TrajectoryRecord(k, anchor_pose, 0.0, False))
            continue
        try:
            pose = compose(anchor_pose, result.transform)
        except ScaleOutOfRange:
            records.append(TrajectoryRecord(k, anchor_pose, result.confidence, False))
            continue
        if result.confidence >= cfg.confidence_floor:
            composite(canvas, frame, pose)
            records.append(TrajectoryRecord(k, pose, result.confidence, True))
            anchor, anchor_pose = frame, pose
        else:
            log.info("frame %d rejected: confidence %.3f", k, result.confidence)
            records.append(TrajectoryRecord(k, pose, result.confidence, False))
    if not records:
        raise EmptySequence("no frames to map")
    return canvas, records


def write_map(path, canvas: MapCanvas) -> MapExport:
    """8-bit map raster at ``path`` plus ``key=value`` sidecar ``<path>.meta``."""
    out = export(canvas)
    path = Path(path)
    write_gray(path, out.raster, bits=8)
    meta = (f"origin_x={out.origin_x}\norigin_y={out.origin_y}\n"
            f"tile_size={canvas.tile_size}\nframe_count={canvas.frame_count}\n")
    Path(str(path) + ".meta").write_text(meta)
    return out
