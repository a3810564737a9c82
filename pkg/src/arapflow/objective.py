"""Energy E(F) = E_data + alpha * E_laplacian and its analytic gradient.

The data term is the Chamfer distance between the translated source and
the target: both directional sums of squared nearest-neighbor distances.
The regularizer is the quadratic form tr(F^T L F) of the graph Laplacian
built once on the source cloud.

The gradient holds the nearest-neighbor assignments fixed at the current
flow (the Chamfer distance is piecewise smooth; this is what automatic
differentiation through the min would produce) and recomputes them on
every evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .core import FlowField, PointCloud, translate


@dataclass(frozen=True)
class Correspondences:
    """Bidirectional nearest-neighbor pairing between two clouds."""

    fwd_idx: np.ndarray     # (n1,) target index nearest to each point of a
    fwd_sqdist: np.ndarray  # (n1,) squared distance, m^2
    bwd_idx: np.ndarray     # (n2,) a-index nearest to each target point
    bwd_sqdist: np.ndarray  # (n2,) squared distance, m^2


@dataclass(frozen=True)
class EnergyBreakdown:
    data: float       # Chamfer term, m^2
    laplacian: float  # tr(F^T L F), m^2
    alpha: float      # regularizer weight, unitless
    total: float      # data + alpha * laplacian


def nearest_correspondences(a: PointCloud, b: PointCloud) -> Correspondences:
    """Exact nearest neighbors in both directions between two clouds."""
    tree_a = cKDTree(a.points)
    tree_b = cKDTree(b.points)
    fwd_d, fwd_i = tree_b.query(a.points, k=1)
    bwd_d, bwd_i = tree_a.query(b.points, k=1)
    return Correspondences(fwd_i, fwd_d**2, bwd_i, bwd_d**2)


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Sum of both directional squared NN distances between a and b."""
    corr = nearest_correspondences(a, b)
    return float(corr.fwd_sqdist.sum() + corr.bwd_sqdist.sum())


def data_term(source: PointCloud, flow: FlowField, target: PointCloud,
              mode: str = "both") -> float:
    """Chamfer distance between the translated source and the target.

    mode="forward" drops the target-to-source sum, for sensitivity checks.
    """
    moved = translate(source, flow)
    corr = nearest_correspondences(moved, target)
    if mode == "forward":
        return float(corr.fwd_sqdist.sum())
    if mode != "both":
        raise ValueError(f"unknown chamfer mode {mode!r}")
    return float(corr.fwd_sqdist.sum() + corr.bwd_sqdist.sum())


def laplacian_term(flow: FlowField, L: sp.spmatrix) -> float:
    """Smoothness term tr(F^T L F) over the graph Laplacian."""
    F = flow.vectors
    if L.shape[0] != F.shape[0]:
        raise ValueError(
            f"Laplacian dimension {L.shape[0]} != flow length {F.shape[0]}"
        )
    return float(np.sum(F * (L @ F)))


def energy(source: PointCloud, flow: FlowField, target: PointCloud,
           L: sp.spmatrix, alpha: float, mode: str = "both") -> EnergyBreakdown:
    """Full objective E(F) = E_data + alpha * E_laplacian."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    e_d = data_term(source, flow, target, mode=mode)
    e_l = laplacian_term(flow, L)
    return EnergyBreakdown(data=e_d, laplacian=e_l, alpha=alpha,
                           total=e_d + alpha * e_l)


def energy_gradient(source: PointCloud, flow: FlowField, target: PointCloud,
                    L: sp.spmatrix, alpha: float, mode: str = "both",
                    _target_tree: cKDTree | None = None) -> FlowField:
    """Analytic gradient of the energy with NN assignments held fixed.

    grad_i = 2 (x_i - y_fwd(i))
           + sum_{j : bwd(j) = i} 2 (x_i - y_j)
           + 2 alpha (L F)_i

    where x is the translated source and y the target. L is symmetric, so
    the quadratic-form gradient is 2 L F.
    """
    moved = source.points + flow.vectors
    tree_b = _target_tree if _target_tree is not None else cKDTree(target.points)
    _, fwd_i = tree_b.query(moved, k=1)

    grad = 2.0 * (moved - target.points[fwd_i])
    if mode == "both":
        _, bwd_i = cKDTree(moved).query(target.points, k=1)
        np.add.at(grad, bwd_i, 2.0 * (moved[bwd_i] - target.points))
    elif mode != "forward":
        raise ValueError(f"unknown chamfer mode {mode!r}")
    if alpha != 0.0:
        grad += 2.0 * alpha * (L @ flow.vectors)
    return FlowField(grad)
