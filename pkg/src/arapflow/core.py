"""Fundamental geometric types: point clouds and per-point flow fields.

All coordinates are stored as float64 in meters. Inputs in float32 are
widened on construction; the gradient checks in the test suite need
double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DivergenceError(RuntimeError):
    """Raised when an optimization run produces NaNs or blows up."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


def _as_points(arr, name):
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {out.shape}")
    if out.shape[0] < 1:
        raise ValueError(f"{name} must contain at least one row")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of n 3D points, meters, right-handed sensor frame.

    Immutable after construction; index i always refers to the same
    physical point.
    """

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points, "points"))

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class FlowField:
    """One 3D displacement vector per source point, meters."""

    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vectors", _as_points(self.vectors, "vectors"))

    def __len__(self):
        return self.vectors.shape[0]

    @staticmethod
    def zeros(n):
        return FlowField(np.zeros((n, 3)))


def translate(source: PointCloud, flow: FlowField) -> PointCloud:
    """Apply the flow to the source cloud: output point i = p_i + f_i."""
    if len(flow) != len(source):
        raise ValueError(
            f"flow length {len(flow)} != source length {len(source)}"
        )
    return PointCloud(source.points + flow.vectors)


def centroid(cloud: PointCloud) -> np.ndarray:
    """Arithmetic mean of all points."""
    return cloud.points.mean(axis=0)
