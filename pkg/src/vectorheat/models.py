"""Analytic model manifolds: circles, flat tori and the round 2-sphere.

Every model carries its exact volume, diameter and Ricci lower bound, can be
sampled into a :class:`PointCloud` with orthonormal tangent frames and
quadrature weights, and knows its scalar and connection-Laplacian spectra in
closed form.  The sphere-comparison constants used by the heat-trace
comparison theorem also live here because they depend only on ``(d, k, D)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import (
    DomainError,
    InvalidParameterError,
    NumericFailure,
    PreconditionError,
    UnsupportedError,
)

KINDS = ("circle", "flat_torus", "sphere2")

#: Largest number of eigenpairs ``analytic_spectra`` will generate.
MAX_ANALYTIC_COUNT = 40_000


@dataclass(frozen=True)
class ManifoldModel:
    """Closed Riemannian manifold described analytically.

    ``ricci_lower`` is the constant ``k`` in ``Ric >= (d-1) k g``.
    """

    kind: str
    params: tuple
    name: str
    dim: int
    volume: float
    diameter: float
    ricci_lower: float

    @property
    def ambient_dim(self) -> int:
        return {"circle": 2, "flat_torus": 2 * self.dim, "sphere2": 3}[self.kind]

    @property
    def radius(self) -> float:
        if self.kind == "flat_torus":
            raise AttributeError("flat tori have periods, not a radius")
        return self.params[0]

    @property
    def periods(self) -> tuple:
        if self.kind != "flat_torus":
            raise AttributeError(f"{self.kind} has no periods")
        return self.params

    @property
    def min_ricci(self) -> float:
        """Infimum of Ric(v, v) over unit vectors."""
        return (self.dim - 1) * self.ricci_lower

    def to_dict(self) -> dict:
        key = "periods" if self.kind == "flat_torus" else "radius"
        value = list(self.params) if self.kind == "flat_torus" else self.params[0]
        return {
            "kind": self.kind,
            key: value,
            "name": self.name,
            "dim": self.dim,
            "volume": self.volume,
            "diameter": self.diameter,
            "ricci_lower": self.ricci_lower,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManifoldModel":
        if data.get("kind") == "flat_torus":
            return make_model("flat_torus", periods=data["periods"])
        return make_model(data["kind"], radius=data["radius"])


def make_model(kind: str, **parameters) -> ManifoldModel:
    """Build a model manifold with exact volume, diameter and Ricci bound.

    Parameters
    ----------
    kind : {"circle", "flat_torus", "sphere2"}
    radius : float
        For ``circle`` and ``sphere2`` (default 1).
    periods : sequence of float
        For ``flat_torus`` (default ``(2*pi, 2*pi)``).
    """
    if kind == "circle":
        r = float(parameters.get("radius", 1.0))
        _check_positive(r, "radius")
        return ManifoldModel(
            kind, (r,), f"circle(r={r:g})", 1, 2 * math.pi * r, math.pi * r, 0.0
        )
    if kind == "flat_torus":
        periods = tuple(float(p) for p in parameters.get("periods", (2 * math.pi,) * 2))
        if len(periods) < 1:
            raise InvalidParameterError("a flat torus needs at least one period")
        for p in periods:
            _check_positive(p, "period")
        d = len(periods)
        diam = math.sqrt(sum((p / 2) ** 2 for p in periods))
        label = ",".join(f"{p:g}" for p in periods)
        return ManifoldModel(
            kind, periods, f"flat_torus({label})", d, math.prod(periods), diam, 0.0
        )
    if kind == "sphere2":
        r = float(parameters.get("radius", 1.0))
        _check_positive(r, "radius")
        return ManifoldModel(
            kind, (r,), f"sphere2(r={r:g})", 2, 4 * math.pi * r**2, math.pi * r, 1 / r**2
        )
    raise InvalidParameterError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def _check_positive(value: float, what: str) -> None:
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{what} must be positive, got {value!r}")


# --------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Discretisation of a model: points, tangent frames and weights.

    ``points`` are intrinsic coordinates (angle on the circle, periodic
    coordinates on the torus, ``(polar, azimuth)`` on the sphere).
    ``frames[i]`` holds ``d`` orthonormal tangent vectors at point ``i``
    expressed in the ambient coordinates ``ambient[i]``; eigenfield samples
    are stored as coefficients in these frames.
    """

    model: ManifoldModel
    points: np.ndarray
    frames: np.ndarray
    weights: np.ndarray
    ambient: np.ndarray
    strategy: str = "grid"
    fallback: str | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.model.dim

    def subset(self, index) -> "PointCloud":
        index = np.asarray(index)
        return PointCloud(
            self.model,
            self.points[index],
            self.frames[index],
            self.weights[index],
            self.ambient[index],
            self.strategy,
            self.fallback,
            dict(self.meta),
        )


def sample(model: ManifoldModel, n: int, strategy: str = "grid", seed: int | None = None) -> PointCloud:
    """Sample ``n`` points of ``model`` with frames and quadrature weights.

    ``strategy`` is ``"grid"`` (deterministic) or ``"uniform_random"``
    (requires ``seed``).  A sphere grid is a Gauss-Legendre latitude rule
    times a uniform longitude rule and needs ``n = 2 m**2``; for other ``n``
    the Fibonacci spiral with equal weights is used and ``fallback`` is set
    to ``"spiral"``.  Tori need ``n = m**d`` for the grid.
    """
    n = int(n)
    d = model.dim
    if n < d + 2:
        raise InvalidParameterError(f"need n >= d + 2 = {d + 2} points, got {n}")
    if strategy not in ("grid", "uniform_random"):
        raise InvalidParameterError(f"unknown sampling strategy {strategy!r}")
    if strategy == "uniform_random" and seed is None:
        raise InvalidParameterError("uniform_random sampling needs an explicit seed")
    rng = np.random.default_rng(seed) if strategy == "uniform_random" else None
    fallback = None

    if model.kind == "circle":
        if rng is None:
            pts = 2 * math.pi * np.arange(n) / n
        else:
            pts = rng.uniform(0, 2 * math.pi, n)
        points = pts[:, None]
        weights = np.full(n, model.volume / n)
    elif model.kind == "flat_torus":
        if rng is None:
            m = round(n ** (1 / d))
            if m**d != n:
                raise InvalidParameterError(
                    f"torus grid needs n to be a perfect {d}-th power, got {n}"
                )
            axes = [L * np.arange(m) / m for L in model.periods]
            mesh = np.meshgrid(*axes, indexing="ij")
            points = np.stack([g.ravel() for g in mesh], axis=1)
        else:
            points = rng.uniform(0, 1, (n, d)) * np.asarray(model.periods)
        weights = np.full(n, model.volume / n)
    else:
        r = model.radius
        if rng is None:
            m = round(math.sqrt(n / 2))
            if 2 * m * m == n:
                z, wz = np.polynomial.legendre.leggauss(m)
                polar = np.arccos(z[::-1])
                wz = wz[::-1]
                azim = 2 * math.pi * (np.arange(2 * m) + 0.5) / (2 * m)
                P, A = np.meshgrid(polar, azim, indexing="ij")
                W = np.repeat(wz, 2 * m) * (2 * math.pi / (2 * m)) * r**2
                points = np.stack([P.ravel(), A.ravel()], axis=1)
                weights = W
            else:
                fallback = "spiral"
                i = np.arange(n)
                z = 1 - (2 * i + 1) / n
                golden = math.pi * (3 - math.sqrt(5))
                points = np.stack([np.arccos(z), np.mod(golden * i, 2 * math.pi)], axis=1)
                weights = np.full(n, model.volume / n)
        else:
            v = rng.standard_normal((n, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            points = np.stack(
                [np.arccos(np.clip(v[:, 2], -1, 1)), np.mod(np.arctan2(v[:, 1], v[:, 0]), 2 * math.pi)],
                axis=1,
            )
            weights = np.full(n, model.volume / n)

    ambient, frames = embed_points(model, points)
    return PointCloud(model, points, frames, weights, ambient, strategy, fallback, {"seed": seed})


def cloud_from_points(model: ManifoldModel, points, weights=None) -> PointCloud:
    """Wrap explicit intrinsic coordinates in a :class:`PointCloud`.

    Weights default to ``volume / n`` each.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != model.dim:
        points = points.reshape(-1, model.dim)
    n = points.shape[0]
    w = np.full(n, model.volume / n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InvalidParameterError("weights must have one entry per point")
    ambient, frames = embed_points(model, points)
    return PointCloud(model, points, frames, w, ambient, "explicit")


def embed_points(model: ManifoldModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ambient coordinates and orthonormal tangent frames for intrinsic points.

    The torus uses its flat (Clifford) embedding into ``R^{2d}``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if model.kind == "circle":
        r = model.radius
        th = points[:, 0]
        ambient = r * np.stack([np.cos(th), np.sin(th)], axis=1)
        frames = np.stack([-np.sin(th), np.cos(th)], axis=1)[:, None, :]
    elif model.kind == "flat_torus":
        d = model.dim
        ambient = np.zeros((n, 2 * d))
        frames = np.zeros((n, d, 2 * d))
        for i, L in enumerate(model.periods):
            ang = 2 * math.pi * points[:, i] / L
            rho = L / (2 * math.pi)
            ambient[:, 2 * i] = rho * np.cos(ang)
            ambient[:, 2 * i + 1] = rho * np.sin(ang)
            frames[:, i, 2 * i] = -np.sin(ang)
            frames[:, i, 2 * i + 1] = np.cos(ang)
    else:
        r = model.radius
        th, ph = points[:, 0], points[:, 1]
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        ambient = r * np.stack([st * cp, st * sp, ct], axis=1)
        e_th = np.stack([ct * cp, ct * sp, -st], axis=1)
        e_ph = np.stack([-sp, cp, np.zeros_like(ph)], axis=1)
        frames = np.stack([e_th, e_ph], axis=1)
    return ambient, frames


def geodesic(model: ManifoldModel, x, y) -> np.ndarray | float:
    """Exact geodesic distance between intrinsic coordinates ``x`` and ``y``.

    Broadcasts over leading axes; returns a float for single points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model.kind == "circle":
        diff = np.mod(np.abs(x - y), 2 * math.pi)
        diff = np.minimum(diff, 2 * math.pi - diff)
        out = model.radius * diff
        if out.ndim and out.shape[-1:] == (1,):
            out = out[..., 0]
    elif model.kind == "flat_torus":
        L = np.asarray(model.periods)
        diff = np.mod(np.abs(x - y), L)
        diff = np.minimum(diff, L - diff)
        out = np.sqrt(np.sum(diff**2, axis=-1))
    else:
        u, _ = embed_points(make_model("sphere2"), np.reshape(x, (-1, 2)))
        v, _ = embed_points(make_model("sphere2"), np.reshape(y, (-1, 2)))
        cross = np.linalg.norm(np.cross(u, v), axis=-1)
        dot = np.sum(u * v, axis=-1)
        out = model.radius * np.arctan2(cross, dot)
        shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
        out = out.reshape(shape)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Closed-form spectra
# --------------------------------------------------------------------------


def _torus_lattice(periods: Sequence[float], lam_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Lattice vectors with eigenvalue <= lam_max, sorted; eigenvalues too."""
    periods = np.asarray(periods, dtype=float)
    bounds = [int(math.floor(math.sqrt(lam_max) * L / (2 * math.pi))) for L in periods]
    axes = [np.arange(-b, b + 1) for b in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    vecs = np.stack([g.ravel() for g in mesh], axis=1)
    freqs = 2 * math.pi * vecs / periods
    lam = np.sum(freqs**2, axis=1)
    keep = lam <= lam_max * (1 + 1e-12)
    vecs, lam = vecs[keep], lam[keep]
    order = np.lexsort(tuple(vecs[:, ::-1].T) + (np.round(lam, 12),))
    return vecs[order], lam[order]


def _half_lattice(vecs: np.ndarray) -> np.ndarray:
    """Mask selecting one representative of each {n, -n} pair (n != 0)."""
    mask = np.zeros(len(vecs), dtype=bool)
    for i, v in enumerate(vecs):
        nz = np.flatnonzero(v)
        if nz.size and v[nz[0]] > 0:
            mask[i] = True
    return mask


def scalar_levels(model: ManifoldModel, lam_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Distinct Laplace-Beltrami eigenvalues <= lam_max with multiplicities."""
    if model.kind == "circle":
        r = model.radius
        kmax = int(math.floor(math.sqrt(max(lam_max, 0)) * r))
        k = np.arange(kmax + 1)
        vals = k**2 / r**2
        mults = np.where(k == 0, 1, 2)
    elif model.kind == "flat_torus":
        _, lam = _torus_lattice(model.periods, lam_max)
        vals, mults = _group(lam)
    else:
        r = model.radius
        lmax = int(math.floor((-1 + math.sqrt(1 + 4 * max(lam_max, 0) * r**2)) / 2))
        l = np.arange(lmax + 1)
        vals = l * (l + 1) / r**2
        mults = 2 * l + 1
    return np.asarray(vals, float), np.asarray(mults, int)


def tangent_levels(model: ManifoldModel, lam_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Distinct connection-Laplacian eigenvalues <= lam_max with multiplicities.

    Tori and circles have a trivial tangent bundle, so every scalar level
    appears ``d`` times over.  On the round sphere of radius ``r`` the
    levels are ``(l(l+1) - 1)/r**2`` with multiplicity ``2(2l+1)``, ``l >= 1``
    (Hodge spectrum on 1-forms shifted by Ric = 1/r**2).
    """
    if model.kind in ("circle", "flat_torus"):
        vals, mults = scalar_levels(model, lam_max)
        return vals, mults * model.dim
    r = model.radius
    lmax = int(math.floor((-1 + math.sqrt(1 + 4 * (max(lam_max, 0) * r**2 + 1))) / 2))
    l = np.arange(1, lmax + 1)
    return (l * (l + 1) - 1) / r**2, 2 * (2 * l + 1)


def _group(lam: np.ndarray, rtol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    if lam.size == 0:
        return lam, np.zeros(0, int)
    starts = [0]
    for i in range(1, lam.size):
        if lam[i] - lam[starts[-1]] > rtol * max(1.0, abs(lam[i])):
            starts.append(i)
    starts.append(lam.size)
    vals = np.array([lam[s] for s in starts[:-1]])
    mults = np.diff(starts)
    return vals, mults


def level_tail(levels_fn, model: ManifoldModel, t: float, above: float, start_lam: float | None = None) -> float:
    """Sum of ``m(nu) exp(-nu t)`` over levels ``nu > above``.

    Levels are generated in growing windows until the last level term drops
    below 1e-18 relative to the accumulated sum and the terms are decaying;
    the remainder is then bounded geometrically by the last ratio.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    lam_max = max(start_lam or 0.0, above) + max(40.0 / t, 1.0)
    while True:
        vals, mults = levels_fn(model, lam_max)
        sel = vals > above * (1 + 1e-12) + 1e-300
        terms = mults[sel] * np.exp(-vals[sel] * t)
        total = float(terms.sum())
        if terms.size >= 2:
            last, prev = terms[-1], terms[-2]
            if last == 0.0:
                return total
            if last <= 1e-18 * total and last < prev:
                ratio = last / prev
                return total + last * ratio / (1 - ratio)
        lam_max *= 2
        if lam_max > 1e12:
            raise NumericFailure("level tail did not converge")


def _circle_scalar(model, points, count):
    r = model.radius
    th = points[:, 0]
    vals = np.empty(count)
    funcs = np.empty((len(th), count))
    for j in range(count):
        k = (j + 1) // 2
        vals[j] = k**2 / r**2
        if k == 0:
            funcs[:, j] = 1 / math.sqrt(2 * math.pi * r)
        elif j % 2 == 1:
            funcs[:, j] = np.cos(k * th) / math.sqrt(math.pi * r)
        else:
            funcs[:, j] = np.sin(k * th) / math.sqrt(math.pi * r)
    return vals, funcs


def _torus_scalar(model, points, count):
    vol = model.volume
    lam_max = 1.0
    while True:
        vecs, lam = _torus_lattice(model.periods, lam_max)
        if len(vecs) >= count:
            break
        lam_max *= 2
    reps = _half_lattice(vecs)
    modes = [(0.0, vecs[0] * 0, "const")]
    for v, l, rep in zip(vecs, lam, reps):
        if rep:
            modes.append((l, v, "cos"))
            modes.append((l, v, "sin"))
    modes.sort(key=lambda m: m[0])  # stable: lattice order within a level
    modes = modes[:count]
    if len(modes) < count:
        raise UnsupportedError("torus lattice enumeration came up short")
    freqs = 2 * math.pi / np.asarray(model.periods)
    vals = np.array([m[0] for m in modes])
    funcs = np.empty((points.shape[0], count))
    for j, (_, v, kind) in enumerate(modes):
        if kind == "const":
            funcs[:, j] = 1 / math.sqrt(vol)
            continue
        phase = points @ (v * freqs)
        trig = np.cos if kind == "cos" else np.sin
        funcs[:, j] = trig(phase) * math.sqrt(2 / vol)
    return vals, funcs


def _real_sph(l: int, m: int, polar, azim, diff: bool = False):
    """Real orthonormal spherical harmonic (and optional angle derivatives)."""
    mm = abs(m)
    if diff:
        y, dy = special.sph_harm_y(l, mm, polar, azim, diff_n=1)
    else:
        y = special.sph_harm_y(l, mm, polar, azim)
        dy = None
    if m == 0:
        part = np.real
        scale = 1.0
    else:
        part = np.real if m > 0 else np.imag
        scale = math.sqrt(2)
    val = scale * part(y)
    if not diff:
        return val
    return val, scale * part(dy[..., 0]), scale * part(dy[..., 1])


def _sphere_scalar(model, points, count):
    r = model.radius
    polar, azim = points[:, 0], points[:, 1]
    vals, cols = [], []
    l = 0
    while len(vals) < count:
        for m in range(-l, l + 1):
            if len(vals) == count:
                break
            vals.append(l * (l + 1) / r**2)
            cols.append(_real_sph(l, m, polar, azim) / r)
        l += 1
    return np.array(vals), np.stack(cols, axis=1)


def _sphere_tangent(model, points, count):
    r = model.radius
    polar, azim = points[:, 0], points[:, 1]
    sin_p = np.sin(polar)
    vals, cols = [], []
    l = 1
    while len(vals) < count:
        norm = r * math.sqrt(l * (l + 1))
        for m in range(-l, l + 1):
            _, d_th, d_ph = _real_sph(l, m, polar, azim, diff=True)
            grad = np.stack([d_th, d_ph / sin_p], axis=1) / norm
            curl = np.stack([-grad[:, 1], grad[:, 0]], axis=1)
            for fld in (grad, curl):
                if len(vals) < count:
                    vals.append((l * (l + 1) - 1) / r**2)
                    cols.append(fld)
        l += 1
    return np.array(vals), np.stack(cols, axis=1)


def analytic_spectra(model: ManifoldModel, count: int, cloud: PointCloud | None = None):
    """Closed-form connection-Laplacian and Laplace-Beltrami eigen-data.

    Returns ``(TangentSpectrum, ScalarSpectrum)`` holding the first
    ``count`` eigenpairs (with multiplicity) of each operator, sampled on
    ``cloud`` (default: a grid of about 64 points per dimension).  Fields are
    coefficient vectors in the cloud's frames.
    """
    from .spectra import ScalarSpectrum, TangentSpectrum

    count = int(count)
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    if count > MAX_ANALYTIC_COUNT:
        raise UnsupportedError(
            f"closed forms are generated for at most {MAX_ANALYTIC_COUNT} eigenpairs, asked {count}"
        )
    if cloud is None:
        cloud = default_cloud(model)
    elif cloud.model != model:
        raise InvalidParameterError("cloud was sampled from a different model")
    pts = cloud.points
    if model.kind == "circle":
        s_vals, s_funcs = _circle_scalar(model, pts, count)
        t_vals, t_fields = s_vals.copy(), s_funcs[:, :, None].copy()
    elif model.kind == "flat_torus":
        d = model.dim
        s_vals, s_funcs = _torus_scalar(model, pts, count)
        n_scalar = -(-count // d)
        b_vals, b_funcs = s_vals[:n_scalar], s_funcs[:, :n_scalar]
        t_vals = np.repeat(b_vals, d)[:count]
        t_fields = np.zeros((len(pts), n_scalar * d, d))
        for axis in range(d):
            t_fields[:, axis::d, axis] = b_funcs
        t_fields = t_fields[:, :count]
    else:
        s_vals, s_funcs = _sphere_scalar(model, pts, count)
        t_vals, t_fields = _sphere_tangent(model, pts, count)
    tangent = TangentSpectrum(t_vals, t_fields, cloud, source="analytic")
    scalar = ScalarSpectrum(s_vals, s_funcs, cloud, source="analytic")
    return tangent, scalar


def default_cloud(model: ManifoldModel) -> PointCloud:
    if model.kind == "circle":
        return sample(model, 256)
    if model.kind == "flat_torus":
        return sample(model, 64**model.dim if model.dim <= 2 else 16**model.dim)
    return sample(model, 2 * 32**2)


# --------------------------------------------------------------------------
# Sphere comparison constants
# --------------------------------------------------------------------------


def sphere_harmonic_dim(l: int, d: int) -> int:
    """Dimension of degree-l spherical harmonics on S^d."""
    if l == 0:
        return 1
    return int(round(special.comb(l + d, d, exact=True) - special.comb(l + d - 2, d, exact=True)))


def sphere_partition(d: int, t: float, tol: float = 1e-14) -> float:
    """Heat trace of the unit sphere S^d, ``sum_l mult(l,d) exp(-l(l+d-1) t)``.

    The sum stops once a geometric bound on the remainder falls below
    ``tol``.  For radius R use ``sphere_partition(d, t / R**2)``.
    """
    if d < 1:
        raise InvalidParameterError("sphere dimension must be >= 1")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    total = 0.0
    l = 0
    while True:
        total += sphere_harmonic_dim(l, d) * math.exp(-l * (l + d - 1) * t)
        if l >= 1 and sphere_partition_tail(d, t, l) < tol:
            return total
        l += 1
        if l > 10_000_000:
            raise NumericFailure("sphere partition did not converge")


def sphere_partition_tail(d: int, t: float, upto: int) -> float:
    """Geometric bound on ``sum_{l > upto}`` of the sphere heat trace."""
    l = upto + 1
    term = sphere_harmonic_dim(l, d) * math.exp(-l * (l + d - 1) * t)
    nxt = sphere_harmonic_dim(l + 1, d) * math.exp(-(l + 1) * (l + d) * t)
    ratio = nxt / term if term > 0 else 0.0
    if ratio >= 1:
        return math.inf
    return term / (1 - ratio)


def sphere_volume(d: int) -> float:
    """Volume of the unit sphere S^d."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def omega(d: int) -> float:
    """Ratio Vol(S^d) / Vol(S^{d-1})."""
    return sphere_volume(d) / sphere_volume(d - 1)


def shape_constant_a(d: int, eps: int, alpha: float | None = None) -> float:
    """Sphere-comparison constant a(d, eps, alpha).

    ``eps = 0`` gives ``(1 + d omega_d)^{1/d} - 1``; ``eps = 1`` uses the
    cosine integral over ``[0, alpha/2]``; ``eps = -1`` gives
    ``alpha * c(alpha)`` with ``c`` the positive root of
    ``z int_0^alpha (cosh s + z sinh s)^{d-1} ds = omega_d``.
    """
    if d < 1:
        raise InvalidParameterError("d must be >= 1")
    if eps not in (-1, 0, 1):
        raise InvalidParameterError("eps must be -1, 0 or 1")
    w = omega(d)
    if eps == 0:
        return (1 + d * w) ** (1 / d) - 1
    if alpha is None or not alpha > 0:
        raise InvalidParameterError("alpha must be positive when eps != 0")
    if eps == 1:
        if d == 1:
            integral = alpha / 2
        else:
            integral, _ = integrate.quad(lambda s: math.cos(s) ** (d - 1), 0, alpha / 2, epsabs=1e-14, epsrel=1e-13)
        return alpha * w ** (1 / d) * (2 * integral) ** (-1 / d)
    return alpha * negative_curvature_root(d, alpha)


def root_residual(z: float, d: int, alpha: float) -> float:
    """Residual of the defining equation of c(alpha)."""
    if d == 1:
        integral = alpha
    else:
        integral, _ = integrate.quad(
            lambda s: (math.cosh(s) + z * math.sinh(s)) ** (d - 1), 0, alpha, epsabs=1e-14, epsrel=1e-13
        )
    return z * integral - omega(d)


def negative_curvature_root(d: int, alpha: float) -> float:
    """The unique positive root c(alpha) used when eps = -1."""
    lo, hi = 1e-12, 1e12
    f_lo, f_hi = root_residual(lo, d, alpha), root_residual(hi, d, alpha)
    if not (f_lo < 0 < f_hi):
        raise NumericFailure(f"no root bracket in [{lo:g}, {hi:g}] for d={d}, alpha={alpha}")
    # bracket by decades first so bisection starts on a sane interval
    a = lo
    b = 10 * lo
    while root_residual(b, d, alpha) < 0:
        a, b = b, b * 10
    return optimize.brentq(root_residual, a, b, args=(d, alpha), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def comparison_radius(
    model: ManifoldModel, eps: int, alpha: float | None = None, convention: str = "statement"
) -> float:
    """Radius R of the comparison sphere for ``model``.

    ``convention="statement"`` gives ``R = D / a(d, eps, alpha)``;
    ``convention="proof"`` gives the reciprocal form ``R = a(d, eps, alpha) D``.
    """
    d = model.dim
    D = model.diameter
    if eps != 0:
        if alpha is None or not alpha > 0:
            raise PreconditionError("alpha must be positive when eps != 0")
        if model.min_ricci * D**2 < (d - 1) * eps * alpha**2 * (1 - 1e-12):
            raise PreconditionError(
                f"r_min D^2 = {model.min_ricci * D**2:g} < (d-1) eps alpha^2 = {(d - 1) * eps * alpha**2:g}"
            )
    a = shape_constant_a(d, eps, alpha)
    if convention == "statement":
        return D / a
    if convention == "proof":
        return a * D
    raise InvalidParameterError(f"unknown convention {convention!r}")


def default_comparison(model: ManifoldModel) -> tuple[int, float | None]:
    """An admissible ``(eps, alpha)`` pair for the model's curvature bound."""
    if model.ricci_lower > 0 and model.dim > 1:
        alpha = math.sqrt(model.min_ricci * model.diameter**2 / (model.dim - 1))
        return 1, alpha
    if model.ricci_lower < 0 and model.dim > 1:
        alpha = math.sqrt(-model.min_ricci * model.diameter**2 / (model.dim - 1))
        return -1, alpha
    return 0, None
