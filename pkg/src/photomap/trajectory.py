"""Trajectory logs: one ``index scale rotation tx ty confidence accepted`` line per frame."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from photomap.registration import SimilarityTransform, wrap_angle

HEADER = "# index scale rotation tx ty confidence accepted"


class LogFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class TrajectoryRecord:
    frame_index: int
    pose: SimilarityTransform
    confidence: float
    accepted: bool


def format_record(r: TrajectoryRecord) -> str:
    p = r.pose
    return (f"{r.frame_index} {p.scale:.6f} {p.rotation:.6f} {p.tx:.3f} {p.ty:.3f} "
            f"{r.confidence:.6f} {int(r.accepted)}")


def format_log(records) -> str:
    return "\n".join([HEADER, *(format_record(r) for r in records)]) + "\n"


def write_log(path, records) -> None:
    Path(path).write_text(format_log(records))


def parse_log(text: str) -> list[TrajectoryRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise LogFormatError(f"expected 7 fields, got {len(parts)}", lineno)
        try:
            index = int(parts[0])
            scale, rot, tx, ty, conf = map(float, parts[1:6])
            accepted = {"1": True, "0": False}[parts[6]]
            pose = SimilarityTransform(scale, rot, tx, ty)
        except (ValueError, KeyError) as exc:
            raise LogFormatError(str(exc) or "bad field", lineno) from None
        if records and index <= records[-1].frame_index:
            raise LogFormatError("frame indices must increase", lineno)
        records.append(TrajectoryRecord(index, pose, conf, accepted))
    return records


def read_log(path) -> list[TrajectoryRecord]:
    return parse_log(Path(path).read_text())


@dataclass(frozen=True)
class FrameError:
    frame_index: int
    position: float
    rotation: float
    scale: float


@dataclass(frozen=True)
class EvaluationSummary:
    frames: list[FrameError]
    mean_position: float
    max_position: float
    max_rotation: float
    final_position: float
    path_length: float

    @property
    def final_percent(self) -> float:
        if self.path_length == 0:
            return 0.0 if self.final_position == 0 else math.inf
        return 100.0 * self.final_position / self.path_length


def evaluate(estimated, truth) -> EvaluationSummary:
    """Compare an estimated trajectory against ground truth.

    Errors are taken over accepted estimated frames; the path length is the
    summed step length of the full ground-truth trajectory.
    """
    if len(estimated) != len(truth):
        raise ValueError(f"frame counts differ: {len(estimated)} vs {len(truth)}")
    frames = []
    for e, t in zip(estimated, truth):
        if not e.accepted:
            continue
        frames.append(FrameError(
            e.frame_index,
            math.hypot(e.pose.tx - t.pose.tx, e.pose.ty - t.pose.ty),
            abs(wrap_angle(e.pose.rotation - t.pose.rotation)),
            abs(e.pose.scale / t.pose.scale - 1.0),
        ))
    xy = np.array([[t.pose.tx, t.pose.ty] for t in truth])
    path = float(np.sum(np.hypot(*np.diff(xy, axis=0).T))) if len(xy) > 1 else 0.0
    pos = np.array([f.position for f in frames]) if frames else np.zeros(1)
    rot = np.array([f.rotation for f in frames]) if frames else np.zeros(1)
    return EvaluationSummary(frames, float(pos.mean()), float(pos.max()), float(rot.max()),
                             float(frames[-1].position) if frames else 0.0, path)
