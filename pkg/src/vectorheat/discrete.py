"""Graph (connection) Laplacians on point clouds and their small eigenpairs.

This is the independent oracle for the closed-form spectra in
:mod:`vectorheat.models`: Gaussian affinities on the ambient coordinates,
closest-orthogonal frame alignments standing in for parallel transport, and
a Krylov eigensolver driven only by operator-vector products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from scipy.spatial import cKDTree

from .errors import AlignmentError, GraphBuildError, InvalidParameterError, NumericFailure, PreconditionError
from .models import PointCloud
from .spectra import ScalarSpectrum, TangentSpectrum

#: Kernel weights below this are dropped from the graph.
WEIGHT_CUTOFF = 1e-8


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Symmetric Gaussian-kernel graph; edges stored once with ``i < j``."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    bandwidth: float

    def matrix(self) -> sparse.csr_matrix:
        W = sparse.coo_matrix((self.weights, (self.rows, self.cols)), shape=(self.n, self.n))
        return (W + W.T).tocsr()

    def degrees(self) -> np.ndarray:
        return np.asarray(self.matrix().sum(axis=1)).ravel()

    def neighbor_counts(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n) + np.bincount(self.cols, minlength=self.n)


def build_graph(cloud: PointCloud, bandwidth: float) -> NeighborGraph:
    """Gaussian kernel graph ``w_ij = exp(-|x_i - x_j|^2 / bandwidth)``.

    Distances are chordal, in the cloud's ambient coordinates.  Weights
    below ``WEIGHT_CUTOFF`` are dropped and self-loops are never stored.
    """
    if not bandwidth > 0:
        raise InvalidParameterError("bandwidth must be positive")
    if cloud.n < 2:
        raise PreconditionError("need at least two points")
    radius = math.sqrt(bandwidth * math.log(1 / WEIGHT_CUTOFF))
    pairs = cKDTree(cloud.ambient).query_pairs(radius, output_type="ndarray")
    if pairs.size == 0:
        pairs = np.zeros((0, 2), dtype=int)
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    diff = cloud.ambient[pairs[:, 0]] - cloud.ambient[pairs[:, 1]]
    w = np.exp(-np.sum(diff**2, axis=1) / bandwidth)
    keep = w >= WEIGHT_CUTOFF
    graph = NeighborGraph(cloud.n, pairs[keep, 0], pairs[keep, 1], w[keep], float(bandwidth))
    n_comp, labels = csgraph.connected_components(graph.matrix(), directed=False)
    if n_comp > 1:
        sizes = np.bincount(labels)
        small = int(np.argmin(sizes))
        members = np.flatnonzero(labels == small)[:10].tolist()
        raise GraphBuildError(
            f"graph has {n_comp} components; smallest has {sizes[small]} nodes (e.g. {members}); increase the bandwidth"
        )
    return graph


def _polar(C: np.ndarray) -> np.ndarray:
    U, s, Vt = np.linalg.svd(C)
    scale = np.maximum(s[..., 0], 1.0)
    if np.any(s[..., -1] <= 1e-10 * scale):
        raise AlignmentError("frame cross-covariance is rank deficient")
    return U @ Vt


def frame_alignment(cloud: PointCloud, i: int, j: int) -> np.ndarray:
    """Closest orthogonal map from frame ``j`` coefficients to frame ``i``.

    The orthogonal polar factor of ``F_i F_j^T``, the discrete surrogate of
    parallel transport from ``x_j`` to ``x_i``.
    """
    if i == j:
        raise PreconditionError("alignment needs two distinct points")
    return _polar(cloud.frames[i] @ cloud.frames[j].T)


def edge_alignments(cloud: PointCloud, graph: NeighborGraph) -> np.ndarray:
    """``O_ij`` for every stored edge; shape (E, d, d)."""
    C = np.einsum("eap,ebp->eab", cloud.frames[graph.rows], cloud.frames[graph.cols])
    return _polar(C)


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Normalised graph (connection) Laplacian scaled by ``4/bandwidth``.

    ``matrix`` is symmetric and negative semidefinite.  ``affinity`` holds the
    raw blocks ``w_ij O_ij`` and ``degree`` the off-diagonal degrees, so
    ``affinity - degree I`` is the unnormalised block Laplacian.
    ``norm_degree`` is the degree used for normalisation (it also counts the
    kernel's value 1 at zero distance).
    """

    matrix: sparse.csr_matrix
    affinity: sparse.csr_matrix
    degree: np.ndarray
    norm_degree: np.ndarray
    block: int
    bandwidth: float
    which: str

    @property
    def shape(self):
        return self.matrix.shape

    def unnormalized(self) -> sparse.csr_matrix:
        return (self.affinity - sparse.diags(np.repeat(self.degree, self.block))).tocsr()

    def random_walk_apply(self, v: np.ndarray) -> np.ndarray:
        """Apply the (non-symmetric) random-walk form, which kills constants."""
        s = np.repeat(np.sqrt(self.norm_degree), self.block)
        return (self.matrix @ (s * v)) / s


def assemble(graph: NeighborGraph, cloud: PointCloud, which: str = "connection", density_normalize: bool = True) -> BlockOperator:
    """Assemble the normalised (connection) Laplacian of ``graph``.

    With ``density_normalize`` the kernel is first divided by the degrees on
    both sides, removing the sampling-density drift.  The result is the
    symmetric form ``(4/eps) (D^{-1/2} (I + A) D^{-1/2} - I)`` where ``A``
    has blocks ``w_ij O_ij`` (scalar: ``O_ij = 1``).
    """
    if which not in ("connection", "scalar"):
        raise InvalidParameterError("which must be 'connection' or 'scalar'")
    if graph.n != cloud.n:
        raise PreconditionError("graph and cloud sizes differ")
    n = graph.n
    d = cloud.dim if which == "connection" else 1
    w = graph.weights.copy()
    degree = np.bincount(graph.rows, w, n) + np.bincount(graph.cols, w, n)
    norm_w = w
    q = 1 + degree
    if density_normalize:
        norm_w = w / (q[graph.rows] * q[graph.cols])
        self_w = 1 / q**2
    else:
        self_w = np.ones(n)
    norm_degree = self_w + np.bincount(graph.rows, norm_w, n) + np.bincount(graph.cols, norm_w, n)

    if which == "scalar":
        O = np.ones((len(w), 1, 1))
    else:
        O = edge_alignments(cloud, graph)
    ii, jj = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    r = (graph.rows[:, None, None] * d + ii).ravel()
    c = (graph.cols[:, None, None] * d + jj).ravel()
    raw_vals = (w[:, None, None] * O).ravel()
    affinity = sparse.coo_matrix((raw_vals, (r, c)), shape=(n * d, n * d))
    affinity = (affinity + affinity.T).tocsr()

    vals = (norm_w[:, None, None] * O).ravel()
    K = sparse.coo_matrix((vals, (r, c)), shape=(n * d, n * d))
    K = K + K.T + sparse.diags(np.repeat(self_w, d))
    s = sparse.diags(np.repeat(1 / np.sqrt(norm_degree), d))
    S = s @ K @ s
    L = (4 / graph.bandwidth) * (S - sparse.identity(n * d))
    L = ((L + L.T) / 2).tocsr()
    return BlockOperator(L, affinity, degree, norm_degree, d, graph.bandwidth, which)


def eigensolve_smallest(
    op: BlockOperator,
    count: int,
    seed: int = 0,
    maxiter: int | None = None,
    residual_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Smallest eigenpairs of ``-op.matrix`` using only matrix-vector products.

    Lanczos (ARPACK) runs on the shifted operator ``c I + L`` with
    ``c = 8/bandwidth`` bounding the spectrum of ``-L``, so the wanted pairs
    are the algebraically largest.  Returns ascending eigenvalues and
    unit-norm eigenvectors as columns.
    """
    L = op.matrix
    size = L.shape[0]
    if count > size:
        raise PreconditionError(f"count {count} exceeds operator size {size}")
    shift = 8.0 / op.bandwidth
    B = LinearOperator((size, size), matvec=lambda v: shift * v + L @ v, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(size)
    ncv = min(size, max(2 * count + 1, count + 40))
    try:
        vals, vecs = eigsh(B, k=count, which="LA", v0=v0, ncv=ncv, tol=1e-14, maxiter=maxiter or 100 * size)
    except ArpackNoConvergence as exc:
        raise NumericFailure(f"eigensolver did not converge; {len(exc.eigenvalues)} of {count} pairs found") from exc
    lam = shift - vals
    order = np.argsort(lam)
    lam, vecs = lam[order], vecs[:, order]
    res = np.linalg.norm(-(L @ vecs) - vecs * lam, axis=0)
    if np.any(res > residual_tol * np.linalg.norm(vecs, axis=0)):
        raise NumericFailure(f"eigen-residuals too large: max {res.max():.3g}")
    lam = np.where(np.abs(lam) < 1e-9, 0.0, lam)
    return lam, vecs


def discrete_spectra(
    cloud: PointCloud,
    bandwidth: float,
    count: int,
    seed: int = 0,
    group_rtol: float = 0.02,
    which: str = "both",
) -> tuple[TangentSpectrum | None, ScalarSpectrum | None]:
    """Point-cloud spectra in the same containers as the closed forms.

    Eigenvectors of the symmetric form are mapped back to the random-walk
    form and normalised under the cloud's quadrature weights.
    """
    graph = build_graph(cloud, bandwidth)
    out = []
    for kind in ("connection", "scalar"):
        if which not in ("both", kind):
            out.append(None)
            continue
        op = assemble(graph, cloud, kind)
        lam, vecs = eigensolve_smallest(op, count, seed=seed)
        d = op.block
        u = vecs.reshape(cloud.n, d, count) / np.sqrt(op.norm_degree)[:, None, None]
        norms = np.sqrt(np.einsum("i,idk,idk->k", cloud.weights, u, u))
        u = u / norms
        meta = {"bandwidth": bandwidth, "seed": seed}
        if kind == "connection":
            out.append(TangentSpectrum(lam, np.transpose(u, (0, 2, 1)), cloud, "discrete", group_rtol, meta))
        else:
            out.append(ScalarSpectrum(lam, u[:, 0, :], cloud, "discrete", group_rtol, meta))
    return out[0], out[1]


def default_bandwidth(cloud: PointCloud, factor: float = 8.0) -> float:
    """``factor * h**2`` with ``h = (Vol/n)**(1/d)`` the mean sample spacing."""
    h = (cloud.model.volume / cloud.n) ** (1 / cloud.dim)
    return factor * h * h
