"""Vector diffusion maps, vector diffusion distances and orthonormal-basis machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import ortho_group

from . import models
from .errors import InputError, NumericFailure, PreconditionError
from .heat import _check_t, diagonal_blocks, fit_counting, kernel_blocks
from .spectra import TangentSpectrum


@dataclass(frozen=True, eq=False)
class VdmEmbedding:
    """Truncated coordinates ``V_t(x)[n, m] = Vol e^{-(lambda_n+lambda_m)t/2} <X_n(x), X_m(x)>``.

    Attributes
    ----------
    coords : ndarray, shape (n_points, K*K)
        Row-major in ``(n, m)``.
    tail_sq : ndarray, shape (n_points,)
        Bound on the squared norm of the dropped coordinates at each point.
    """

    t: float
    volume: float
    K: int
    pairs: np.ndarray
    points: np.ndarray
    coords: np.ndarray
    tail_sq: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def gram(self) -> np.ndarray:
        return self.coords @ self.coords.T

    def distances(self) -> np.ndarray:
        """Pairwise l2 distances between the embedded points."""
        return squareform(pdist(self.coords))


def _check_boundary(spec: TangentSpectrum, K: int) -> None:
    if K < 1 or K > spec.size:
        raise PreconditionError(f"K must lie in [1, {spec.size}]")
    if K not in spec.boundaries():
        raise PreconditionError(
            f"K={K} splits an eigenspace; allowed truncations include {spec.boundaries()[:8]}"
        )


def embed(spec: TangentSpectrum, t: float, K: int | None = None, points=None) -> VdmEmbedding:
    """Vector diffusion map of the sample points, truncated to the first ``K`` fields.

    ``K`` must sit on an eigenspace boundary so that the truncated map is
    still basis independent up to an orthogonal change of coordinates.
    """
    _check_t(t)
    K = spec.size if K is None else int(K)
    _check_boundary(spec, K)
    idx = np.arange(spec.n) if points is None else np.asarray(points)
    vol = spec.volume
    e = np.exp(-spec.eigenvalues[:K] * t / 2)
    f = spec.fields[idx, :K] * e[None, :, None]
    coords = vol * np.einsum("ind,imd->inm", f, f).reshape(len(idx), K * K)
    n_idx, m_idx = np.divmod(np.arange(K * K), K)
    pairs = np.stack([n_idx, m_idx], axis=1)
    # dropped pairs: ||A+T||^2 - ||A||^2 <= 2 tr(A) tr(T) + tr(T)^2
    P = spec.diag_partial(t, K)[idx]
    T = spec.diag_tail(t, K)[idx]
    tail_sq = vol**2 * (2 * P * T + T**2)
    return VdmEmbedding(float(t), vol, K, pairs, idx, coords, tail_sq)


def vdm_distance(spec: TangentSpectrum, t: float, x: int, y: int) -> float:
    """Vector diffusion distance ``||V_t(x) - V_t(y)||`` via kernel blocks.

    ``Vol * sqrt(|K_xx|^2 + |K_yy|^2 - 2 |K_xy|^2)`` with Frobenius norms;
    never touches a basis.
    """
    return float(vdm_distances(spec, t, [x], [y])[0, 0])


def vdm_distances(spec: TangentSpectrum, t: float, xs=None, ys=None) -> np.ndarray:
    """Matrix of vector diffusion distances between ``xs`` and ``ys``."""
    _check_t(t)
    xs = np.arange(spec.n) if xs is None else np.asarray(xs)
    ys = np.arange(spec.n) if ys is None else np.asarray(ys)
    diag = diagonal_blocks(spec, t)
    h = np.einsum("xij,xij->x", diag, diag)
    cross = kernel_blocks(spec, t, xs, ys)
    rad = h[xs][:, None] + h[ys][None, :] - 2 * np.einsum("abij,abij->ab", cross, cross)
    scale = np.maximum(1.0, h[xs][:, None] + h[ys][None, :])
    if np.any(rad < -1e-12 * scale):
        raise NumericFailure(f"negative radicand {rad.min():.3g}; spectrum is inconsistent")
    # exact zero on coincident points; the radicand there is pure cancellation
    rad[xs[:, None] == ys[None, :]] = 0.0
    return spec.volume * np.sqrt(np.clip(rad, 0, None))


# --------------------------------------------------------------------------
# bases
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BasisRotation:
    """An element of the product of orthogonal groups over eigenspaces."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.blocks)
        for b in blocks:
            if b.shape[0] != b.shape[1] or not np.allclose(b.T @ b, np.eye(b.shape[0]), atol=1e-12, rtol=0):
                raise InputError("rotation blocks must be square orthogonal matrices")
        object.__setattr__(self, "blocks", blocks)

    @property
    def sizes(self) -> list[int]:
        return [b.shape[0] for b in self.blocks]

    @classmethod
    def identity(cls, spec: TangentSpectrum) -> "BasisRotation":
        return cls(tuple(np.eye(s.stop - s.start) for s in spec.eigenspaces))

    @classmethod
    def random(cls, spec: TangentSpectrum, seed=None, fix_zero: bool = False) -> "BasisRotation":
        """Haar-random blocks; with ``fix_zero`` the zero eigenspace is left alone."""
        rng = np.random.default_rng(seed)
        blocks = []
        for s, nu in zip(spec.eigenspaces, spec.levels):
            m = s.stop - s.start
            if fix_zero and nu == 0:
                blocks.append(np.eye(m))
            elif m == 1:
                blocks.append(np.array([[rng.choice([-1.0, 1.0])]]))
            else:
                blocks.append(ortho_group.rvs(m, random_state=rng))
        return cls(tuple(blocks))

    def inverse(self) -> "BasisRotation":
        return BasisRotation(tuple(b.T for b in self.blocks))

    def compose(self, other: "BasisRotation") -> "BasisRotation":
        """``self`` applied after ``other``."""
        if self.sizes != other.sizes:
            raise InputError("rotations act on different eigenspace layouts")
        return BasisRotation(tuple(a @ b for a, b in zip(self.blocks, other.blocks)))


def apply_rotation(spec: TangentSpectrum, rotation: BasisRotation) -> TangentSpectrum:
    """Re-express the fields in the rotated basis ``X^b_j = sum_k R_jk X^a_k``."""
    spaces = spec.eigenspaces
    if rotation.sizes != [s.stop - s.start for s in spaces]:
        raise InputError(
            f"rotation blocks {rotation.sizes[:6]} do not match multiplicities {list(spec.multiplicities[:6])}"
        )
    fields = spec.fields.copy()
    for s, R in zip(spaces, rotation.blocks):
        fields[:, s] = np.einsum("jk,ikd->ijd", R, spec.fields[:, s])
    return spec.replace_fields(fields)


def basis_metric_d_E(R1, R2) -> float:
    """``||R1^{-1} R2 - I||_HS`` for orthogonal matrices of equal size."""
    R1, R2 = np.atleast_2d(R1), np.atleast_2d(R2)
    if R1.shape != R2.shape:
        raise InputError("blocks must have the same dimension")
    return float(np.linalg.norm(R1.T @ R2 - np.eye(R1.shape[0])))


def basis_distance_d_B(
    a: BasisRotation, b: BasisRotation, spec: TangentSpectrum, N_exponent: float, zero_mode: str = "error"
) -> float:
    """``sqrt(sum_k nu_k^{-N} d_E(a_k, b_k)^2)`` over the retained eigenspaces.

    A zero eigenvalue makes the weight undefined.  ``zero_mode="error"``
    refuses; ``"skip"`` drops zero eigenspaces when ``a`` and ``b`` agree
    there and returns ``inf`` otherwise.  See :func:`basis_distance_tail`
    for the contribution of the dropped eigenspaces.
    """
    if not N_exponent > spec.dim / 2:
        raise PreconditionError(f"N_exponent must exceed d/2 = {spec.dim / 2}")
    if a.sizes != b.sizes or a.sizes != list(spec.multiplicities):
        raise InputError("rotations do not match the spectrum's eigenspaces")
    if zero_mode not in ("error", "skip"):
        raise InputError("zero_mode must be 'error' or 'skip'")
    total = 0.0
    for nu, A, B in zip(spec.levels, a.blocks, b.blocks):
        dE = basis_metric_d_E(A, B)
        if nu <= 0:
            if zero_mode == "error":
                raise PreconditionError(
                    "zero eigenvalue present: weight nu^-N is undefined; pass zero_mode='skip' "
                    "to drop parallel-field eigenspaces"
                )
            if dE > 1e-12:
                return math.inf
            continue
        total += nu ** (-N_exponent) * dE**2
    return math.sqrt(total)


def basis_distance_tail(spec: TangentSpectrum, N_exponent: float) -> float:
    """Estimated bound on the squared d_B contribution of dropped eigenspaces.

    Uses ``d_E <= 2 sqrt(m)`` and a fitted Weyl law ``N(lam) ~ c2 lam^{d/2}``:
    ``4 c2 (d/2)/(N - d/2) * Lambda^{d/2 - N}`` with ``Lambda`` the truncation.
    """
    d = spec.dim
    if not N_exponent > d / 2:
        raise PreconditionError(f"N_exponent must exceed d/2 = {d / 2}")
    lam = spec.eigenvalues[-1]
    if lam <= 0 or len(spec.levels) < 3:
        return math.inf
    _, c2 = fit_counting(spec, d)
    return 4 * c2 * (d / 2) / (N_exponent - d / 2) * lam ** (d / 2 - N_exponent)


# --------------------------------------------------------------------------
# asymptotics and diagnostics
# --------------------------------------------------------------------------


def geodesic_prediction(model: models.ManifoldModel, t: float, v_norm: float) -> float:
    """Leading small-time term ``sqrt(d Vol^2 (4 pi)^{-d} |v|^2 / t^{d+1})``.

    Valid for ``|v|^2 << t << 1``; guarded by ``|v|^2 < t/10`` and ``t < 0.5``.
    """
    _check_t(t)
    if not (v_norm**2 < t / 10 and t < 0.5):
        raise PreconditionError("need v_norm^2 < t/10 and t < 0.5")
    d = model.dim
    return math.sqrt(d * model.volume**2 * (4 * math.pi) ** (-d) * v_norm**2 / t ** (d + 1))


def injectivity_margin(embedding: VdmEmbedding) -> float:
    """Smallest distance between two distinct embedded sample points."""
    if embedding.n < 2:
        raise PreconditionError("need at least two points")
    return float(pdist(embedding.coords).min())


def sobolev_h1_norm(spec: TangentSpectrum, t: float, x: int) -> float:
    """``Vol^2 sum_{i,j} (1 + i^{2/d} + j^{2/d}) e^{-(lambda_i+lambda_j)t} <X_i(x), X_j(x)>^2``.

    Indices are 1-based.  Evaluated as ``Vol^2 (|K|^2 + 2 sum_i i^{2/d} w_i X_i^T K X_i)``
    with ``K = k_TM(t, x, x)`` and ``w_i = e^{-lambda_i t}``.
    """
    _check_t(t)
    w = np.exp(-spec.eigenvalues * t)
    f = spec.fields[x]
    K = (f * w[:, None]).T @ f
    i = np.arange(1, spec.size + 1) ** (2.0 / spec.dim)
    quad = np.einsum("nd,de,ne->n", f, K, f)
    return float(spec.volume**2 * (np.sum(K * K) + 2 * np.sum(i * w * quad)))
