"""Downstream applications: motion segmentation and densification.

Segmentation thresholds the flow magnitude into static/dynamic labels.
Densification accumulates neighboring frames onto a center frame by
chaining pairwise scene flows hop by hop, so each hop only has to bridge
the small inter-frame motion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PointCloud, translate
from .solver import SolverConfig, solve

LABEL_STATIC = 0
LABEL_DYNAMIC = 1


@dataclass(frozen=True)
class MotionLabels:
    labels: np.ndarray  # (n,) int, LABEL_STATIC or LABEL_DYNAMIC
    threshold: float    # meters


@dataclass(frozen=True)
class FrameSequence:
    """Temporally adjacent point clouds with a designated center frame."""

    frames: list
    center_index: int

    def __post_init__(self):
        if not 0 <= self.center_index < len(self.frames):
            raise ValueError(
                f"center_index {self.center_index} out of range "
                f"for {len(self.frames)} frames")


def segment_by_motion(flow, threshold: float) -> MotionLabels:
    """Label each point dynamic iff its flow magnitude exceeds threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    norms = np.linalg.norm(flow.vectors, axis=1)
    labels = np.where(norms > threshold, LABEL_DYNAMIC, LABEL_STATIC)
    return MotionLabels(labels=labels, threshold=float(threshold))


def densify(seq: FrameSequence, config: SolverConfig = SolverConfig(),
            window: int = 1) -> PointCloud:
    """Accumulate frames within +/- window hops of the center frame.

    Each outer frame is walked towards the center one hop at a time: the
    pairwise flow to the next frame is solved, the points are translated,
    and the result feeds the next hop. The output is the union of the
    center frame and all motion-compensated neighbors.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    c = seq.center_index
    lo = max(0, c - window)
    hi = min(len(seq.frames) - 1, c + window)

    accumulated = [seq.frames[c].points]
    for j in list(range(lo, c)) + list(range(hi, c, -1)):
        step = 1 if j < c else -1
        moved = seq.frames[j]
        for hop in range(j, c, step):
            try:
                report = solve(moved, seq.frames[hop + step], config)
            except Exception as exc:
                raise RuntimeError(
                    f"densify failed on hop {hop} -> {hop + step}") from exc
            moved = translate(moved, report.flow)
        accumulated.append(moved.points)
    return PointCloud(np.vstack(accumulated))
