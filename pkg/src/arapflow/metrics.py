"""Evaluation statistics between estimated and ground-truth flow fields.

Four numbers: mean end-point error (m), the percentage of vectors with
error below 0.05 m or 5% relative, the same at 0.1 m / 10%, and the mean
angle error (rad). Thresholds are strict inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlowField

EPS_REL = 1e-12   # guards relative error for zero ground-truth vectors
EPS_ANGLE = 1e-12  # guards the angle denominator
NEAR_ZERO = 1e-12  # below this norm a vector has no defined direction


@dataclass(frozen=True)
class FlowMetrics:
    epe: float        # mean end-point error, m
    acc5: float       # percent in [0, 100]
    acc10: float      # percent in [0, 100]
    angle_err: float  # mean angle, rad


def evaluate(est: FlowField, gt: FlowField) -> FlowMetrics:
    """Compare an estimated flow field against ground truth."""
    if len(est) != len(gt):
        raise ValueError(f"length mismatch: est {len(est)} vs gt {len(gt)}")
    e_vec = est.vectors
    g_vec = gt.vectors

    err = np.linalg.norm(e_vec - g_vec, axis=1)
    gt_norm = np.linalg.norm(g_vec, axis=1)
    est_norm = np.linalg.norm(e_vec, axis=1)
    rel = err / np.maximum(gt_norm, EPS_REL)

    acc5 = 100.0 * np.mean((err < 0.05) | (rel < 0.05))
    acc10 = 100.0 * np.mean((err < 0.1) | (rel < 0.1))

    cos = np.sum(e_vec * g_vec, axis=1) / (est_norm * gt_norm + EPS_ANGLE)
    theta = np.arccos(np.clip(cos, -1.0, 1.0))
    # Degenerate directions: both near-zero -> perfectly aligned by
    # convention; exactly one near-zero -> undefined, scored pi/2.
    est_zero = est_norm < NEAR_ZERO
    gt_zero = gt_norm < NEAR_ZERO
    theta = np.where(est_zero & gt_zero, 0.0, theta)
    theta = np.where(est_zero ^ gt_zero, np.pi / 2, theta)

    return FlowMetrics(epe=float(err.mean()), acc5=float(acc5),
                       acc10=float(acc10), angle_err=float(theta.mean()))
