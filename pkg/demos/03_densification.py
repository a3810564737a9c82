"""Point cloud densification by motion-compensated frame accumulation.

Three frames of a scene with a static background and one moving cluster
are accumulated onto the middle frame. Rigid ICP accumulation must
compromise between background and mover, smearing the mover ("ghosting");
chaining per-point scene flow keeps both sharp.

Writes dense_flow.ply and dense_icp.ply for visual inspection.
"""

import numpy as np
from scipy.spatial import cKDTree

from arapflow import (FrameSequence, PointCloud, SolverConfig, densify,
                      icp_align, write_ply)

rng = np.random.default_rng(0)
background = rng.uniform(-2, 2, (300, 3))
mover = rng.uniform(-0.5, 0.5, (150, 3)) + [6.0, 0.0, 0.0]
velocity = np.array([0.2, 0.0, 0.0])
frames = [PointCloud(np.vstack([background, mover + i * velocity]))
          for i in range(3)]
center = frames[1]

seq = FrameSequence(frames=frames, center_index=1)
dense = densify(seq, config=SolverConfig(iters=500, k=15), window=1)
write_ply("dense_flow.ply", dense)

parts = [center.points]
for j in (0, 2):
    transform, _ = icp_align(frames[j], center)
    parts.append(transform.apply(frames[j].points))
dense_icp = PointCloud(np.vstack(parts))
write_ply("dense_icp.ply", dense_icp)

tree = cKDTree(center.points)
print(f"accumulated {len(dense)} points from {len(frames)} frames")
print(f"mean distance to center frame, flow chaining: "
      f"{tree.query(dense.points)[0].mean():.4f} m")
print(f"mean distance to center frame, rigid ICP:     "
      f"{tree.query(dense_icp.points)[0].mean():.4f} m")
