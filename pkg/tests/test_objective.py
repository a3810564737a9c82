import numpy as np
import pytest
import scipy.sparse as sp

from arapflow import (FlowField, PointCloud, build_knn_graph, chamfer,
                      data_term, degree_matrix, energy, energy_gradient,
                      laplacian, laplacian_term, nearest_correspondences,
                      translate, weight_matrix)


def brute_force_nn(a, b):
    """O(nm) oracle: nearest index and squared distance for each row of a."""
    d2 = np.sum((a[:, None] - b[None, :]) ** 2, axis=2)
    idx = d2.argmin(axis=1)
    return idx, d2[np.arange(len(a)), idx]


def brute_force_chamfer(a, b):
    _, f = brute_force_nn(a, b)
    _, g = brute_force_nn(b, a)
    return f.sum() + g.sum()


def random_instance(seed, n=40, m=50):
    rng = np.random.default_rng(seed)
    a = PointCloud(rng.normal(size=(n, 3)))
    b = PointCloud(rng.normal(size=(m, 3)))
    return a, b


def source_laplacian(cloud, k=5, normalized=False):
    W = weight_matrix(build_knn_graph(cloud, k))
    return laplacian(W, degree_matrix(W), normalized=normalized)


class TestNearestCorrespondences:
    def test_self_match(self):
        a, _ = random_instance(0)
        corr = nearest_correspondences(a, a)
        assert np.array_equal(corr.fwd_idx, np.arange(len(a)))
        assert np.all(corr.fwd_sqdist == 0)
        assert np.all(corr.bwd_sqdist == 0)

    def test_hand_enumeration(self):
        a = PointCloud([[0.0, 0, 0]])
        b = PointCloud([[1.0, 0, 0], [3.0, 0, 0]])
        corr = nearest_correspondences(a, b)
        assert corr.fwd_idx[0] == 0 and corr.fwd_sqdist[0] == 1.0
        assert np.array_equal(corr.bwd_idx, [0, 0])
        assert np.allclose(corr.bwd_sqdist, [1.0, 9.0])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(100, 3))
        b = rng.normal(size=(120, 3))
        corr = nearest_correspondences(PointCloud(a), PointCloud(b))
        fi, fd = brute_force_nn(a, b)
        bi, bd = brute_force_nn(b, a)
        assert np.array_equal(corr.fwd_idx, fi)
        assert np.array_equal(corr.bwd_idx, bi)
        assert np.allclose(corr.fwd_sqdist, fd, rtol=1e-12)
        assert np.allclose(corr.bwd_sqdist, bd, rtol=1e-12)


class TestChamfer:
    def test_identical_clouds(self):
        a, _ = random_instance(3)
        assert chamfer(a, a) == 0.0

    def test_hand_arithmetic(self):
        a = PointCloud([[0.0, 0, 0]])
        b = PointCloud([[1.0, 0, 0]])
        assert chamfer(a, b) == 2.0  # 1 forward + 1 backward

    def test_symmetric(self):
        a, b = random_instance(4)
        assert np.isclose(chamfer(a, b), chamfer(b, a), rtol=1e-12)

    def test_zero_iff_equal_multisets(self):
        a = PointCloud([[0.0, 0, 0], [1.0, 0, 0], [1.0, 0, 0]])
        b = PointCloud([[1.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0]])
        assert chamfer(a, b) == 0.0
        c = PointCloud([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
        assert chamfer(a, c) > 0.0


class TestDataTerm:
    def test_exact_flow_gives_zero(self):
        rng = np.random.default_rng(5)
        src = PointCloud(rng.normal(size=(30, 3)))
        f = FlowField(rng.normal(size=(30, 3)) * 0.1)
        tgt = translate(src, f)
        assert data_term(src, f, tgt) == 0.0

    def test_zero_flow_reduces_to_chamfer(self):
        a, b = random_instance(6)
        assert data_term(a, FlowField.zeros(len(a)), b) == chamfer(a, b)

    def test_matches_composition_oracle(self):
        a, b = random_instance(7)
        rng = np.random.default_rng(8)
        f = FlowField(rng.normal(size=(len(a), 3)) * 0.2)
        expected = brute_force_chamfer(a.points + f.vectors, b.points)
        assert np.isclose(data_term(a, f, b), expected, rtol=1e-12)

    def test_forward_mode(self):
        a, b = random_instance(9)
        f = FlowField.zeros(len(a))
        fwd = data_term(a, f, b, mode="forward")
        _, d = brute_force_nn(a.points, b.points)
        assert np.isclose(fwd, d.sum(), rtol=1e-12)


class TestLaplacianTerm:
    def test_zero_flow(self):
        a, _ = random_instance(10)
        L = source_laplacian(a)
        assert laplacian_term(FlowField.zeros(len(a)), L) == 0.0

    def test_constant_flow_unnormalized(self):
        a, _ = random_instance(11)
        L = source_laplacian(a, normalized=False)
        f = FlowField(np.tile([0.3, -0.2, 0.9], (len(a), 1)))
        assert abs(laplacian_term(f, L)) < 1e-10

    def test_matches_dense_trace_oracle(self):
        rng = np.random.default_rng(12)
        a = PointCloud(rng.normal(size=(150, 3)))
        L = source_laplacian(a, k=6, normalized=True)
        F = rng.normal(size=(150, 3))
        expected = np.trace(F.T @ L.toarray() @ F)
        got = laplacian_term(FlowField(F), L)
        assert np.isclose(got, expected, rtol=1e-10)

    def test_quadratic_homogeneity(self):
        rng = np.random.default_rng(13)
        a = PointCloud(rng.normal(size=(60, 3)))
        L = source_laplacian(a)
        F = rng.normal(size=(60, 3))
        base = laplacian_term(FlowField(F), L)
        for c in (0.5, 2.0, 7.0):
            assert np.isclose(laplacian_term(FlowField(c * F), L),
                              c**2 * base, rtol=1e-10)

    def test_dimension_mismatch(self):
        a, _ = random_instance(14)
        L = source_laplacian(a)
        with pytest.raises(ValueError):
            laplacian_term(FlowField.zeros(len(a) + 1), L)


class TestEnergy:
    def test_alpha_zero_is_data_term(self):
        a, b = random_instance(15)
        L = source_laplacian(a)
        f = FlowField(np.random.default_rng(16).normal(size=(len(a), 3)) * 0.1)
        e = energy(a, f, b, L, alpha=0.0)
        assert e.total == e.data == data_term(a, f, b)

    def test_perfect_match_zero(self):
        a, _ = random_instance(17)
        L = source_laplacian(a)
        e = energy(a, FlowField.zeros(len(a)), a, L, alpha=10.0)
        assert e.total == 0.0

    def test_total_is_weighted_sum(self):
        a, b = random_instance(18)
        L = source_laplacian(a)
        f = FlowField(np.random.default_rng(19).normal(size=(len(a), 3)) * 0.1)
        e = energy(a, f, b, L, alpha=10.0)
        assert np.isclose(e.total, e.data + 10.0 * e.laplacian, rtol=1e-12)
        assert np.isclose(e.data, data_term(a, f, b), rtol=1e-12)
        assert np.isclose(e.laplacian, laplacian_term(f, L), rtol=1e-12)

    def test_target_permutation_invariance(self):
        a, b = random_instance(20)
        L = source_laplacian(a)
        f = FlowField(np.random.default_rng(21).normal(size=(len(a), 3)) * 0.1)
        perm = np.random.default_rng(22).permutation(len(b))
        e1 = energy(a, f, b, L, alpha=10.0)
        e2 = energy(a, f, PointCloud(b.points[perm]), L, alpha=10.0)
        assert np.isclose(e1.total, e2.total, rtol=1e-12)

    def test_source_permutation_invariance(self):
        a, b = random_instance(23)
        rng = np.random.default_rng(24)
        f = rng.normal(size=(len(a), 3)) * 0.1
        perm = rng.permutation(len(a))
        e1 = energy(a, FlowField(f), b, source_laplacian(a), alpha=10.0)
        ap = PointCloud(a.points[perm])
        e2 = energy(ap, FlowField(f[perm]), b, source_laplacian(ap), alpha=10.0)
        assert np.isclose(e1.total, e2.total, rtol=1e-10)


def finite_difference_gradient(src, flow, tgt, L, alpha, h=1e-6):
    """Central-difference oracle over every flow coordinate."""
    F = flow.vectors.copy()
    grad = np.zeros_like(F)
    for i in range(F.shape[0]):
        for d in range(3):
            Fp, Fm = F.copy(), F.copy()
            Fp[i, d] += h
            Fm[i, d] -= h
            ep = energy(src, FlowField(Fp), tgt, L, alpha).total
            em = energy(src, FlowField(Fm), tgt, L, alpha).total
            grad[i, d] = (ep - em) / (2 * h)
    return grad


class TestEnergyGradient:
    def test_stationary_at_perfect_match(self):
        a, _ = random_instance(25)
        L = source_laplacian(a)
        g = energy_gradient(a, FlowField.zeros(len(a)), a, L, alpha=10.0)
        assert np.all(g.vectors == 0.0)

    def test_single_point_hand_derivative(self):
        a = PointCloud([[0.0, 0, 0]])
        b = PointCloud([[1.0, 0, 0]])
        L = sp.csr_matrix((1, 1))
        g = energy_gradient(a, FlowField.zeros(1), b, L, alpha=0.0)
        # both Chamfer sums contribute 2(x - y) = (-2, 0, 0)
        assert np.allclose(g.vectors, [[-4.0, 0.0, 0.0]])

    @pytest.mark.parametrize("alpha", [0.0, 10.0])
    def test_matches_finite_differences(self, alpha):
        rng = np.random.default_rng(26)
        src = PointCloud(rng.normal(size=(25, 3)))
        tgt = PointCloud(rng.normal(size=(30, 3)))
        L = source_laplacian(src, k=4, normalized=True)
        flow = FlowField(rng.normal(size=(25, 3)) * 0.05)
        analytic = energy_gradient(src, flow, tgt, L, alpha).vectors
        fd = finite_difference_gradient(src, flow, tgt, L, alpha)
        rel = np.linalg.norm(analytic - fd) / np.linalg.norm(fd)
        assert rel < 1e-5
