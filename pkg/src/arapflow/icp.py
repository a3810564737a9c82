"""Rigid point-to-point ICP baseline.

One global rotation+translation per scene, fit by alternating nearest
neighbor correspondence with the SVD-based least-squares alignment
(Kabsch). The induced per-point flow lets the rigid baseline be scored
with the same metrics as the non-rigid solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import FlowField, PointCloud

DEGENERACY_TOL = 1e-12


class DegenerateGeometryError(ValueError):
    """Raised when the correspondence set cannot pin down a rotation."""


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray     # (3, 3) orthonormal, det +1
    translation: np.ndarray  # (3,) meters

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity():
        return RigidTransform(np.eye(3), np.zeros(3))

    def apply(self, points):
        return points @ self.rotation.T + self.translation


def kabsch(src_pts, dst_pts) -> RigidTransform:
    """Least-squares rigid fit of corresponded point sets via SVD.

    Minimizes sum ||R src_i + t - dst_i||^2; reflections are corrected by
    flipping the smallest singular direction.
    """
    src = np.asarray(src_pts, dtype=np.float64)
    dst = np.asarray(dst_pts, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 3:
        raise ValueError("src and dst must both have shape (n, 3)")
    if src.shape[0] < 3:
        raise ValueError("need at least 3 correspondences")

    src_c = src.mean(axis=0)
    dst_c = dst.mean(axis=0)
    H = (src - src_c).T @ (dst - dst_c)
    U, S, Vt = np.linalg.svd(H)
    # Collinear (or coincident) points leave the rotation underdetermined.
    if S[1] <= DEGENERACY_TOL * max(S[0], 1.0):
        raise DegenerateGeometryError(
            "correspondences are rank-deficient (collinear or coincident)")
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    t = dst_c - R @ src_c
    return RigidTransform(R, t)


def icp_align(source: PointCloud, target: PointCloud,
              max_iters: int = 50, tol: float = 1e-6, trim: float = 0.0):
    """Point-to-point ICP; returns (RigidTransform, final RMSE in meters).

    Stops when the RMSE improvement drops below tol or after max_iters.
    The full transform is re-fit from the original source points each
    iteration, so with trim=0 the RMSE sequence is non-increasing. A
    positive trim drops that worst fraction of correspondences from each
    fit (RMSE is still reported over all points).
    """
    if not 0.0 <= trim < 1.0:
        raise ValueError("trim must be in [0, 1)")
    tree = cKDTree(target.points)
    transform = RigidTransform.identity()
    prev_rmse = None
    rmse = np.inf
    n_fit = max(3, int(round(len(source) * (1.0 - trim))))
    for _ in range(max_iters):
        moved = transform.apply(source.points)
        dists, idx = tree.query(moved, k=1)
        rmse = float(np.sqrt(np.mean(dists**2)))
        # Alternating NN + least-squares fit cannot increase the RMSE.
        assert trim > 0 or prev_rmse is None or rmse <= prev_rmse + 1e-9
        if prev_rmse is not None and prev_rmse - rmse < tol:
            break
        prev_rmse = rmse
        keep = (np.argsort(dists, kind="stable")[:n_fit] if trim > 0
                else slice(None))
        transform = kabsch(source.points[keep], target.points[idx[keep]])
    return transform, rmse


def rigid_flow(cloud: PointCloud, transform: RigidTransform) -> FlowField:
    """Per-point flow induced by a rigid transform: f_i = R p_i + t - p_i."""
    return FlowField(transform.apply(cloud.points) - cloud.points)
