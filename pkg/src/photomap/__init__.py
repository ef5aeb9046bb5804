"""Photomap reconstruction from downward-looking aerial image sequences.

Frames are registered pairwise with a Fourier-Mellin estimator
(:mod:`photomap.registration`), chained into map poses and composited onto a
sparse tile canvas (:mod:`photomap.mosaic`).  :mod:`photomap.flightsim` renders
synthetic blimp flights with known ground truth.
"""

from photomap.errors import (
    DegenerateInput,
    EmptyCanvas,
    EmptySequence,
    InvalidDt,
    PhotomapError,
    ScaleOutOfRange,
    SizeMismatch,
    TargetNotPowerOfTwo,
    TargetTooSmall,
)
from photomap.preprocess import CalibrationParams, Frame, RawImage, prepare_frame
from photomap.registration import (
    FmiConfig,
    RegistrationResult,
    SimilarityTransform,
    register,
)
from photomap.mosaic import MapCanvas, build_map, compose, composite, export, invert

__all__ = [
    "CalibrationParams",
    "DegenerateInput",
    "EmptyCanvas",
    "EmptySequence",
    "FmiConfig",
    "Frame",
    "InvalidDt",
    "MapCanvas",
    "PhotomapError",
    "RawImage",
    "RegistrationResult",
    "ScaleOutOfRange",
    "SimilarityTransform",
    "SizeMismatch",
    "TargetNotPowerOfTwo",
    "TargetTooSmall",
    "build_map",
    "compose",
    "composite",
    "export",
    "invert",
    "prepare_frame",
    "register",
]
