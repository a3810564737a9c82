"""Symmetric k-NN graph on the source cloud and its Laplacian matrices.

The edge set is the union over vertices of their k nearest neighbors by
Euclidean distance, symmetrized (an edge exists if i is a k-NN of j or
vice versa). Edge weights are exp(-r^2) with r the raw edge distance in
meters; the weight matrix carries an explicit unit diagonal, and the
degree includes that self-weight so D is always strictly positive.

Sparse matrices are scipy.sparse CSR throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .core import PointCloud


@dataclass(frozen=True)
class KnnGraph:
    """Undirected k-NN graph: edges stored once as (i, j) pairs with i < j."""

    n: int
    k: int
    edges: np.ndarray       # (m, 2) int64, i < j, no self-loops
    edge_dists: np.ndarray  # (m,) Euclidean length of each edge, meters

    def degree(self):
        """Number of incident edges per vertex."""
        return np.bincount(self.edges.ravel(), minlength=self.n)


def build_knn_graph(cloud: PointCloud, k: int) -> KnnGraph:
    """Build the symmetric k-NN graph of a point cloud.

    Ties in distance are broken by smaller point index so the edge set is
    deterministic. Duplicate points are legal and produce zero-length edges.
    """
    pts = cloud.points
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")

    tree = cKDTree(pts)
    # k+1 because each point is its own nearest neighbor.
    dists, idx = tree.query(pts, k=k + 1)

    rows = np.repeat(np.arange(n), k + 1)
    cols = idx.ravel()
    dvec = dists.ravel()

    # Deterministic neighbor selection: order candidates by (dist, index),
    # drop self-matches, keep the first k per vertex.
    order = np.lexsort((cols, dvec, rows))
    rows, cols, dvec = rows[order], cols[order], dvec[order]
    keep = rows != cols
    rows, cols, dvec = rows[keep], cols[keep], dvec[keep]
    # After removing self each vertex has k or k+1 candidates (k+1 when a
    # duplicate point displaced the self-match); keep the first k.
    pos = np.arange(rows.size) - np.searchsorted(rows, rows, side="left")
    keep = pos < k
    rows, cols, dvec = rows[keep], cols[keep], dvec[keep]

    # Symmetrize: store each undirected edge once with i < j.
    pairs = np.stack([np.minimum(rows, cols), np.maximum(rows, cols)], axis=1)
    pairs, first = np.unique(pairs, axis=0, return_index=True)
    dvec = dvec[first]
    return KnnGraph(n=n, k=k, edges=pairs, edge_dists=dvec)


def weight_matrix(graph: KnnGraph) -> sp.csr_matrix:
    """Edge-weighted adjacency with unit diagonal: W_ij = exp(-r_ij^2)."""
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    w = np.exp(-graph.edge_dists**2)
    rows = np.concatenate([i, j, np.arange(graph.n)])
    cols = np.concatenate([j, i, np.arange(graph.n)])
    vals = np.concatenate([w, w, np.ones(graph.n)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(graph.n, graph.n))


def degree_matrix(W: sp.spmatrix) -> sp.csr_matrix:
    """Diagonal matrix of row sums of W (self-weight included)."""
    d = np.asarray(W.sum(axis=1)).ravel()
    return sp.diags(d, format="csr")


def laplacian(W: sp.spmatrix, D: sp.spmatrix, normalized: bool = True) -> sp.csr_matrix:
    """Graph Laplacian L = D - W, optionally degree-normalized.

    The normalized form is D^{-1/2} (D - W) D^{-1/2}, computed by scaling
    the entries of D - W so the result stays exactly symmetric.
    """
    d = D.diagonal()
    if np.any(d <= 0):
        raise ValueError("degree matrix must be strictly positive on the diagonal")
    L = (D - W).tocoo()
    if normalized:
        dinv_sqrt = 1.0 / np.sqrt(d)
        # scale factor computed first so entry (i,j) and (j,i) round identically
        data = L.data * (dinv_sqrt[L.row] * dinv_sqrt[L.col])
        L = sp.coo_matrix((data, (L.row, L.col)), shape=L.shape)
    return L.tocsr()


def laplacian_for_cloud(cloud: PointCloud, k: int, normalized: bool = True) -> sp.csr_matrix:
    """Convenience: k-NN graph -> W -> D -> L in one call."""
    W = weight_matrix(build_knn_graph(cloud, k))
    return laplacian(W, degree_matrix(W), normalized=normalized)
