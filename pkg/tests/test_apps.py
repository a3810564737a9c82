import numpy as np
import pytest

from arapflow import (FlowField, FrameSequence, PointCloud, SolverConfig,
                      densify, icp_align, segment_by_motion)
from arapflow.apps import LABEL_DYNAMIC, LABEL_STATIC
from arapflow.synth import generate, translation_spec

FAST = SolverConfig(iters=300, k=10)


class TestSegmentByMotion:
    def test_zero_flow_all_static(self):
        labels = segment_by_motion(FlowField.zeros(10), threshold=0.1)
        assert np.all(labels.labels == LABEL_STATIC)

    def test_split_by_norm(self):
        f = FlowField([[0.01, 0.0, 0.0], [0.5, 0.0, 0.0]])
        labels = segment_by_motion(f, threshold=0.1)
        assert list(labels.labels) == [LABEL_STATIC, LABEL_DYNAMIC]

    def test_huge_threshold_all_static(self):
        rng = np.random.default_rng(0)
        f = FlowField(rng.normal(size=(20, 3)))
        labels = segment_by_motion(f, threshold=1e12)
        assert np.all(labels.labels == LABEL_STATIC)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(1)
        vecs = rng.normal(size=(30, 3)) * 0.2
        perm = rng.permutation(30)
        l1 = segment_by_motion(FlowField(vecs), 0.2).labels
        l2 = segment_by_motion(FlowField(vecs[perm]), 0.2).labels
        assert np.array_equal(l1[perm], l2)

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            segment_by_motion(FlowField.zeros(2), threshold=0.0)


class TestFrameSequence:
    def test_center_index_validated(self):
        frames = [PointCloud(np.zeros((1, 3)))]
        with pytest.raises(ValueError):
            FrameSequence(frames=frames, center_index=1)


class TestDensify:
    def _frames(self, velocity, n=120, count=3, seed=2):
        """count frames of one cluster moving at constant velocity."""
        src, _, _ = generate(translation_spec(count=n, seed=seed))
        v = np.asarray(velocity)
        return [PointCloud(src.points + i * v) for i in range(count)]

    def test_window_zero_is_center_frame(self):
        frames = self._frames([0.1, 0.0, 0.0])
        seq = FrameSequence(frames=frames, center_index=1)
        out = densify(seq, config=FAST, window=0)
        assert np.array_equal(out.points, frames[1].points)

    def test_static_frames_overlap(self):
        frames = self._frames([0.0, 0.0, 0.0])
        seq = FrameSequence(frames=frames, center_index=1)
        out = densify(seq, config=FAST, window=1)
        assert len(out) == sum(len(f) for f in frames)
        # every accumulated point should sit on top of a center-frame point
        from scipy.spatial import cKDTree
        d, _ = cKDTree(frames[1].points).query(out.points)
        assert d.max() < 2e-3

    def test_moving_cluster_beats_icp_accumulation(self):
        # static background plus one cluster moving at constant velocity;
        # a single rigid fit must compromise between the two ("ghosting")
        from scipy.spatial import cKDTree
        rng = np.random.default_rng(3)
        static = rng.uniform(-1, 1, (120, 3))
        mover = rng.uniform(-0.5, 0.5, (120, 3)) + [4.0, 0.0, 0.0]
        v = np.array([0.15, 0.0, 0.0])
        frames = [PointCloud(np.vstack([static, mover + i * v]))
                  for i in range(3)]
        center = frames[1]
        seq = FrameSequence(frames=frames, center_index=1)
        ours = densify(seq, config=FAST, window=1)
        tree = cKDTree(center.points)
        ours_d = tree.query(ours.points)[0].mean()

        # rigid accumulation: align each outer frame to the center with ICP
        parts = [center.points]
        for j in (0, 2):
            T, _ = icp_align(frames[j], center)
            parts.append(T.apply(frames[j].points))
        icp_d = tree.query(np.vstack(parts))[0].mean()

        assert ours_d < 0.1
        assert ours_d < icp_d

    def test_window_clipped_to_bounds(self):
        frames = self._frames([0.0, 0.0, 0.0], count=2)
        seq = FrameSequence(frames=frames, center_index=0)
        out = densify(seq, config=FAST, window=5)
        assert len(out) == len(frames[0]) + len(frames[1])
