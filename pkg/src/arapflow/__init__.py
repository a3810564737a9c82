"""Non-rigid scene flow from point cloud pairs.

Recovers a per-point 3D motion field between two clouds by minimizing a
Chamfer matching term plus a graph-Laplacian "as-rigid-as-possible"
regularizer with Adam at runtime. Ships a rigid ICP baseline, evaluation
metrics, synthetic scenes with exact ground truth, PLY/raw I/O, and two
applications (motion segmentation, point cloud densification).
"""

from .core import DivergenceError, FlowField, PointCloud, centroid, translate
from .graph import (KnnGraph, build_knn_graph, degree_matrix, laplacian,
                    laplacian_for_cloud, weight_matrix)
from .objective import (Correspondences, EnergyBreakdown, chamfer, data_term,
                        energy, energy_gradient, laplacian_term,
                        nearest_correspondences)
from .solver import AdamState, SolveReport, SolverConfig, adam_step, solve
from .metrics import FlowMetrics, evaluate
from .icp import (DegenerateGeometryError, RigidTransform, icp_align, kabsch,
                  rigid_flow)
from .apps import FrameSequence, MotionLabels, densify, segment_by_motion
from .synth import ClusterSpec, SceneSpec, generate
from .io import (read_ply, read_raw_f32, write_metrics_json, write_ply,
                 write_raw_f32)

__version__ = "0.1.0"
