"""Truncated eigen-data of the connection Laplacian and the Laplace-Beltrami operator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import InputError

#: Grouping tolerance for eigenspaces, relative to max(1, |lambda|).
ANALYTIC_GROUP_RTOL = 1e-9


def _group_slices(values: np.ndarray, rtol: float) -> list[slice]:
    if values.size == 0:
        return []
    starts = [0]
    for i in range(1, values.size):
        if values[i] - values[starts[-1]] > rtol * max(1.0, abs(values[i])):
            starts.append(i)
    starts.append(values.size)
    return [slice(a, b) for a, b in zip(starts[:-1], starts[1:])]


@dataclass(frozen=True, eq=False)
class TangentSpectrum:
    """Truncated spectrum of the connection Laplacian sampled on a cloud.

    Attributes
    ----------
    eigenvalues : ndarray, shape (N,)
        ``lambda_1 <= ... <= lambda_N``.
    fields : ndarray, shape (n, N, d)
        ``fields[i, k]`` are the frame coefficients of ``X_k`` at point ``i``.
    cloud : PointCloud
        Points, frames and quadrature weights.
    source : {"analytic", "discrete"}
    group_rtol : float
        Tolerance used to group eigenvalues into eigenspaces.
    """

    eigenvalues: np.ndarray
    fields: np.ndarray
    cloud: models.PointCloud
    source: str = "analytic"
    group_rtol: float = ANALYTIC_GROUP_RTOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        fld = np.asarray(self.fields, dtype=float)
        if fld.ndim != 3:
            raise InputError("fields must have shape (n, N, d)")
        if lam.shape != (fld.shape[1],):
            raise InputError(f"{lam.size} eigenvalues but {fld.shape[1]} fields")
        if fld.shape[0] != self.cloud.n or fld.shape[2] != self.cloud.dim:
            raise InputError("fields do not match the cloud's points or dimension")
        if np.any(np.diff(lam) < 0):
            raise InputError("eigenvalues must be ascending")
        if np.any(lam < -1e-9):
            raise InputError("connection-Laplacian eigenvalues must be non-negative")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "fields", fld)
        object.__setattr__(self, "_slices", _group_slices(lam, self.group_rtol))

    # basic shape ---------------------------------------------------------

    @property
    def model(self) -> models.ManifoldModel:
        return self.cloud.model

    @property
    def n(self) -> int:
        return self.fields.shape[0]

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def dim(self) -> int:
        return self.fields.shape[2]

    @property
    def volume(self) -> float:
        return self.cloud.model.volume

    @property
    def weights(self) -> np.ndarray:
        return self.cloud.weights

    @property
    def eigenspaces(self) -> list[slice]:
        """Index slices of the eigenspaces present in the truncation."""
        return list(self._slices)

    @property
    def levels(self) -> np.ndarray:
        """Distinct eigenvalues ``nu_1 < nu_2 < ...``."""
        return np.array([self.eigenvalues[s].mean() for s in self._slices])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([s.stop - s.start for s in self._slices])

    def boundaries(self) -> list[int]:
        """Truncation sizes that do not split an eigenspace."""
        return [s.stop for s in self._slices]

    def gram(self) -> np.ndarray:
        """Weighted Gram matrix ``int <X_n, X_m> dV`` under the cloud weights."""
        return np.einsum("i,ind,imd->nm", self.weights, self.fields, self.fields)

    def truncate(self, K: int) -> "TangentSpectrum":
        return TangentSpectrum(
            self.eigenvalues[:K], self.fields[:, :K], self.cloud, self.source, self.group_rtol, dict(self.meta)
        )

    def replace_fields(self, fields: np.ndarray) -> "TangentSpectrum":
        return TangentSpectrum(self.eigenvalues, fields, self.cloud, self.source, self.group_rtol, dict(self.meta))

    # heat-series helpers ---------------------------------------------------

    def field_norms_sq(self, upto: int | None = None) -> np.ndarray:
        """``|X_n(x)|^2`` for every point and field, shape (n, N)."""
        f = self.fields if upto is None else self.fields[:, :upto]
        return np.einsum("ind,ind->in", f, f)

    def diag_partial(self, t: float, upto: int | None = None) -> np.ndarray:
        """``sum_{n <= upto} exp(-lambda_n t) |X_n(x)|^2`` for every point."""
        upto = self.size if upto is None else upto
        return self.field_norms_sq(upto) @ np.exp(-self.eigenvalues[:upto] * t)

    def diag_tail(self, t: float, upto: int | None = None) -> np.ndarray:
        """Per-point bound on ``sum_{n > upto} exp(-lambda_n t) |X_n(x)|^2``.

        Analytic spectra of the homogeneous models use the exact identity
        ``sum over an eigenspace of |X_n(x)|^2 = m(nu)/Vol``.  Other spectra use
        the comparison-sphere majorant ``Z_{S^d}(t/R^2)/Vol`` minus the
        computed partial sum.
        """
        upto = self.size if upto is None else upto
        if self.source == "analytic":
            return _homogeneous_tail(
                models.tangent_levels, self.model, t, self.eigenvalues[:upto], self.field_norms_sq(upto)
            )
        return _majorant_tail(self.model, t, self.diag_partial(t, upto))

    def trace_tail(self, t: float, upto: int | None = None) -> float:
        """Bound on ``sum_{j > upto} exp(-lambda_j t)``."""
        upto = self.size if upto is None else upto
        if self.source == "analytic":
            return _homogeneous_trace_tail(models.tangent_levels, self.model, t, self.eigenvalues[:upto])
        partial = float(np.exp(-self.eigenvalues[:upto] * t).sum())
        return max(0.0, self.model.dim * _sphere_majorant(self.model, t) - partial)


@dataclass(frozen=True, eq=False)
class ScalarSpectrum:
    """Truncated Laplace-Beltrami spectrum ``mu_0 = 0 <= mu_1 <= ...``."""

    eigenvalues: np.ndarray
    functions: np.ndarray
    cloud: models.PointCloud
    source: str = "analytic"
    group_rtol: float = ANALYTIC_GROUP_RTOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        mu = np.asarray(self.eigenvalues, dtype=float)
        fn = np.asarray(self.functions, dtype=float)
        if fn.ndim != 2 or fn.shape != (self.cloud.n, mu.size):
            raise InputError("functions must have shape (n, N) matching the cloud")
        if np.any(np.diff(mu) < 0):
            raise InputError("eigenvalues must be ascending")
        if mu.size == 0 or abs(mu[0]) > 1e-6 * max(1.0, mu[-1]):
            raise InputError("a scalar spectrum must start with mu_0 = 0")
        object.__setattr__(self, "eigenvalues", mu)
        object.__setattr__(self, "functions", fn)
        object.__setattr__(self, "_slices", _group_slices(mu, self.group_rtol))

    @property
    def model(self) -> models.ManifoldModel:
        return self.cloud.model

    @property
    def n(self) -> int:
        return self.functions.shape[0]

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def volume(self) -> float:
        return self.cloud.model.volume

    @property
    def weights(self) -> np.ndarray:
        return self.cloud.weights

    @property
    def eigenspaces(self) -> list[slice]:
        return list(self._slices)

    def gram(self) -> np.ndarray:
        return np.einsum("i,in,im->nm", self.weights, self.functions, self.functions)

    def truncate(self, K: int) -> "ScalarSpectrum":
        return ScalarSpectrum(self.eigenvalues[:K], self.functions[:, :K], self.cloud, self.source, self.group_rtol)

    def diag_partial(self, t: float, upto: int | None = None) -> np.ndarray:
        upto = self.size if upto is None else upto
        return (self.functions[:, :upto] ** 2) @ np.exp(-self.eigenvalues[:upto] * t)

    def diag_tail(self, t: float, upto: int | None = None) -> np.ndarray:
        upto = self.size if upto is None else upto
        if self.source == "analytic":
            return _homogeneous_tail(
                models.scalar_levels, self.model, t, self.eigenvalues[:upto], self.functions[:, :upto] ** 2
            )
        return _majorant_tail(self.model, t, self.diag_partial(t, upto))

    def trace_tail(self, t: float, upto: int | None = None) -> float:
        upto = self.size if upto is None else upto
        if self.source == "analytic":
            return _homogeneous_trace_tail(models.scalar_levels, self.model, t, self.eigenvalues[:upto])
        partial = float(np.exp(-self.eigenvalues[:upto] * t).sum())
        return max(0.0, _sphere_majorant(self.model, t) - partial)


# --------------------------------------------------------------------------
# tails
# --------------------------------------------------------------------------


def _last_level(levels_fn, model, lam: np.ndarray) -> tuple[float, int, int]:
    """(value, full multiplicity, retained count) of the last retained level."""
    last = lam[-1]
    vals, mults = levels_fn(model, last * (1 + 1e-9) + 1e-12)
    k = int(np.argmin(np.abs(vals - last)))
    if abs(vals[k] - last) > 1e-8 * max(1.0, last):
        raise InputError("retained eigenvalues do not match the model's closed-form levels")
    retained = int(np.sum(np.abs(lam - last) <= 1e-8 * max(1.0, last)))
    return float(vals[k]), int(mults[k]), retained


def _homogeneous_tail(levels_fn, model, t, lam, norms_sq) -> np.ndarray:
    n = norms_sq.shape[0]
    if lam.size == 0:
        return np.full(n, models.level_tail(levels_fn, model, t, -1.0) / model.volume)
    nu, mult, _ = _last_level(levels_fn, model, lam)
    in_last = np.abs(lam - nu) <= 1e-8 * max(1.0, nu)
    partial_rest = np.clip(mult / model.volume - norms_sq[:, in_last].sum(axis=1), 0, None)
    beyond = models.level_tail(levels_fn, model, t, nu) / model.volume
    return partial_rest * np.exp(-nu * t) + beyond


def _homogeneous_trace_tail(levels_fn, model, t, lam) -> float:
    if lam.size == 0:
        return models.level_tail(levels_fn, model, t, -1.0)
    nu, mult, retained = _last_level(levels_fn, model, lam)
    return (mult - retained) * np.exp(-nu * t) + models.level_tail(levels_fn, model, t, nu)


def _sphere_majorant(model: models.ManifoldModel, t: float) -> float:
    """``Z_{S^d(1)}(t/R^2)``, an upper bound for ``Vol k_M(t,x,x)``."""
    eps, alpha = models.default_comparison(model)
    R = models.comparison_radius(model, eps, alpha)
    return models.sphere_partition(model.dim, t / R**2)


def _majorant_tail(model, t, partial) -> np.ndarray:
    return np.clip(_sphere_majorant(model, t) / model.volume - partial, 0, None)
