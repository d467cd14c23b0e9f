"""Heat kernels of the connection Laplacian, partition functions and trace inequalities.

Every double sum over eigen-vector fields ``(n, m)`` is evaluated through
``d x d`` kernel blocks or per-eigenspace ``d x d`` Gram blocks, never as an
``N x N`` sum.  Truncation bounds come from :meth:`TangentSpectrum.diag_tail`
and friends, so each check carries a tolerance rather than a guess.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from . import models
from .errors import DomainError, InputError, PreconditionError, RangeError
from .report import CheckReport
from .spectra import ScalarSpectrum, TangentSpectrum


class KernelBlock(NamedTuple):
    block: np.ndarray
    error: float


class TruncatedSum(NamedTuple):
    value: float
    tail: float


def _check_t(t: float) -> None:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")


def _same_manifold(tangent: TangentSpectrum, scalar: ScalarSpectrum) -> None:
    if tangent.model != scalar.model:
        raise InputError(f"spectra come from different manifolds: {tangent.model.name} vs {scalar.model.name}")


# --------------------------------------------------------------------------
# kernel evaluation
# --------------------------------------------------------------------------


def kernel_block(spec: TangentSpectrum, t: float, x: int, y: int) -> KernelBlock:
    """``k_TM(t, x, y)`` in frame coordinates, with an HS-norm truncation bound.

    The bound is ``sqrt(tail_x tail_y)`` by Cauchy-Schwarz over the dropped
    fields.
    """
    _check_t(t)
    w = np.exp(-spec.eigenvalues * t)
    fx, fy = spec.fields[x], spec.fields[y]
    block = (fx * w[:, None]).T @ fy
    tail = spec.diag_tail(t)
    return KernelBlock(block, float(math.sqrt(tail[x] * tail[y])))


def kernel_blocks(spec: TangentSpectrum, t: float, xs=None, ys=None) -> np.ndarray:
    """All blocks ``k_TM(t, x, y)`` for ``x in xs``, ``y in ys``; shape (|xs|, |ys|, d, d)."""
    _check_t(t)
    xs = np.arange(spec.n) if xs is None else np.asarray(xs)
    ys = np.arange(spec.n) if ys is None else np.asarray(ys)
    w = np.exp(-spec.eigenvalues * t)
    return np.einsum("ani,n,bnj->abij", spec.fields[xs], w, spec.fields[ys], optimize=True)


def diagonal_blocks(spec: TangentSpectrum, t: float) -> np.ndarray:
    """``k_TM(t, x, x)`` for every sample point; shape (n, d, d)."""
    _check_t(t)
    w = np.exp(-spec.eigenvalues * t)
    return np.einsum("xni,n,xnj->xij", spec.fields, w, spec.fields, optimize=True)


def hs_norm(spec: TangentSpectrum, t: float, x: int, y: int) -> float:
    """Hilbert-Schmidt norm of ``k_TM(t, x, y)``."""
    return float(np.linalg.norm(kernel_block(spec, t, x, y).block))


def hs_norm_diagonal(spec: TangentSpectrum, t: float) -> np.ndarray:
    """``||k_TM(t, x, x)||_HS`` at every sample point."""
    blocks = diagonal_blocks(spec, t)
    return np.sqrt(np.einsum("xij,xij->x", blocks, blocks))


def scalar_kernel(scalar: ScalarSpectrum, t: float, x: int, y: int) -> float:
    """``k_M(t, x, y)`` from the truncated scalar spectrum."""
    _check_t(t)
    w = np.exp(-scalar.eigenvalues * t)
    return float(np.sum(scalar.functions[x] * w * scalar.functions[y]))


def scalar_diagonal(scalar: ScalarSpectrum, t: float) -> TruncatedSum:
    """``k_M(t, x, x)`` at every point (partial sums) and per-point tail bounds."""
    _check_t(t)
    return TruncatedSum(scalar.diag_partial(t), scalar.diag_tail(t))


# --------------------------------------------------------------------------
# partition functions and the trace inequalities
# --------------------------------------------------------------------------


def partition(spec: TangentSpectrum | ScalarSpectrum, t: float, tail_tol: float = 1e-12) -> TruncatedSum:
    """Heat trace ``sum_j exp(-lambda_j t)`` of either operator.

    Returns the partial sum over the retained eigenvalues and a bound on the
    dropped remainder; warns when that bound exceeds ``tail_tol``.
    """
    _check_t(t)
    value = float(np.exp(-spec.eigenvalues * t).sum())
    tail = float(spec.trace_tail(t))
    if tail > tail_tol:
        warnings.warn(
            f"partition truncation tail {tail:.3g} exceeds {tail_tol:g} at t={t:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return TruncatedSum(value, tail)


def check_kato(tangent: TangentSpectrum, scalar: ScalarSpectrum, t: float) -> CheckReport:
    """Kato-type trace inequality ``Z_TM(t) <= d Z_M(t)``."""
    _same_manifold(tangent, scalar)
    d = tangent.dim
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        z_tm = partition(tangent, t)
        z_m = partition(scalar, t)
    lhs = z_tm.value + z_tm.tail
    rhs = d * (z_m.value + z_m.tail)
    tol = z_tm.tail + d * z_m.tail + 1e-13 * rhs
    return CheckReport(
        "kato",
        {"model": tangent.model.name, "t": t, "d": d},
        lhs,
        rhs,
        tol,
        {"ratio": lhs / (z_m.value + z_m.tail), "z_tm_tail": z_tm.tail, "z_m_tail": z_m.tail},
    )


def check_trace_comparison(
    model: models.ManifoldModel,
    scalar: ScalarSpectrum,
    t: float,
    eps: int,
    alpha: float | None = None,
    convention: str = "statement",
) -> CheckReport:
    """Pointwise sphere comparison ``Vol k_M(t,x,x) <= Z_{S^d(1)}(t/R^2)``.

    ``lhs`` is the worst point (partial sum plus its tail bound).
    """
    _check_t(t)
    if scalar.model != model:
        raise InputError("scalar spectrum does not belong to the model")
    R = models.comparison_radius(model, eps, alpha, convention)
    diag = scalar_diagonal(scalar, t)
    upper = model.volume * (diag.value + diag.tail)
    rhs = models.sphere_partition(model.dim, t / R**2)
    worst = int(np.argmax(upper))
    tol = 1e-12 * max(1.0, rhs)
    return CheckReport(
        "trace_comparison",
        {"model": model.name, "t": t, "eps": eps, "alpha": alpha, "convention": convention},
        float(upper[worst]),
        rhs,
        tol,
        {"R": R, "worst_point": worst, "tail": float(model.volume * diag.tail[worst])},
    )


def check_hs_diagonal(tangent: TangentSpectrum, scalar: ScalarSpectrum, t: float) -> CheckReport:
    """``||k_TM(t,x,x)||_HS <= k_M(t,x,x)`` at every sample point.

    The truncated HS norm is a lower bound of the full one (partial sums of
    PSD blocks), so only the scalar tail enters the tolerance.  ``extra``
    also records the worst ratio and the ``sqrt(d) k_M`` variant.
    """
    _same_manifold(tangent, scalar)
    hs = hs_norm_diagonal(tangent, t)
    km = scalar_diagonal(scalar, t)
    gap = hs - km.value
    worst = int(np.argmax(gap))
    ratio = float(np.max(hs / km.value))
    return CheckReport(
        "hs_diagonal",
        {"model": tangent.model.name, "t": t},
        float(hs[worst]),
        float(km.value[worst]),
        float(km.tail[worst]) + 1e-12 * float(km.value[worst]),
        {"max_ratio": ratio, "sqrt_d_bound_holds": bool(np.all(hs <= math.sqrt(tangent.dim) * (km.value + km.tail) * (1 + 1e-12)))},
    )


def check_op_diagonal(tangent: TangentSpectrum, scalar: ScalarSpectrum, t: float) -> CheckReport:
    """Operator-norm form ``|k_TM(t,x,x)|_op <= k_M(t,x,x)`` at every sample point."""
    _same_manifold(tangent, scalar)
    op = np.linalg.eigvalsh(diagonal_blocks(tangent, t))[:, -1]
    km = scalar_diagonal(scalar, t)
    worst = int(np.argmax(op - km.value))
    return CheckReport(
        "op_diagonal",
        {"model": tangent.model.name, "t": t},
        float(op[worst]),
        float(km.value[worst]),
        float(km.tail[worst]) + 1e-12 * float(km.value[worst]),
        {"max_ratio": float(np.max(op / km.value))},
    )


def check_diagonal_trace(tangent: TangentSpectrum, scalar: ScalarSpectrum, t: float, factor: float = 1.0) -> CheckReport:
    """``sum_n exp(-lambda_n t)|X_n(x)|^2 <= factor * k_M(t,x,x)`` at every point.

    ``factor=1`` is the pointwise claim used in the eigenvalue lemma; it is
    sharp on the circle.  The left side is the trace of ``k_TM(t,x,x)``,
    which on a trivial bundle equals ``d k_M(t,x,x)``; ``factor=d`` is the
    bound that holds in general.
    """
    _same_manifold(tangent, scalar)
    lhs = tangent.diag_partial(t)
    lhs_tail = tangent.diag_tail(t)
    km = scalar_diagonal(scalar, t)
    gap = lhs - factor * km.value
    worst = int(np.argmax(gap))
    return CheckReport(
        "diagonal_trace",
        {"model": tangent.model.name, "t": t, "factor": factor},
        float(lhs[worst]),
        float(factor * km.value[worst]),
        float(factor * km.tail[worst] + lhs_tail[worst]) + 1e-12 * float(km.value[worst]),
        {"max_ratio": float(np.max(lhs / km.value))},
    )


# --------------------------------------------------------------------------
# eigenvalue lemma quantities
# --------------------------------------------------------------------------


def f_integral(alpha: float, d: int, log: bool = False) -> float:
    """``F(alpha, d) = int_0^inf int_0^inf (x+y)^alpha x^d y^d e^{-(x+y)} dx dy``.

    Closed form ``Gamma(d+1)^2 Gamma(alpha+2d+2) / Gamma(2d+2)`` (substitute
    ``s = x + y``), evaluated in log-Gamma space.  With ``log=True`` the
    natural log is returned, which stays finite where ``F`` overflows.
    """
    if alpha < 0 or d < 1:
        raise PreconditionError("need alpha >= 0 and d >= 1")
    log_f = 2 * special.gammaln(d + 1) + special.gammaln(alpha + 2 * d + 2) - special.gammaln(2 * d + 2)
    if log:
        return float(log_f)
    with np.errstate(over="ignore"):
        return float(np.exp(log_f))


def f_integral_quadrature(alpha: float, d: int) -> float:
    """Direct 2-D quadrature of ``F(alpha, d)`` (independent oracle)."""

    def inner(y):
        val, _ = integrate.quad(
            lambda x: (x + y) ** alpha * x**d * math.exp(-x), 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        return val * y**d * math.exp(-y)

    val, _ = integrate.quad(inner, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _block_grams(spec: TangentSpectrum, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenspace levels and the Frobenius Gram of their d x d blocks at x.

    ``P[k, l] = sum_{n in E_k, m in E_l} <X_n(x), X_m(x)>^2``.
    """
    fx = spec.fields[x]
    S = np.stack([fx[s].T @ fx[s] for s in spec.eigenspaces])
    flat = S.reshape(len(S), -1)
    return spec.levels, flat @ flat.T


def weighted_diagonal_sum(spec: TangentSpectrum, t: float, x: int, alpha: float) -> tuple[float, float]:
    """``sum_{n,m} (lambda_n+lambda_m)^alpha e^{-t(lambda_n+lambda_m)} <X_n(x),X_m(x)>^2``.

    Returns ``(sum, sum * t**(alpha + d))``; the second value is the scaling
    diagnostic that stays bounded as ``t -> 0``.
    """
    _check_t(t)
    nu, P = _block_grams(spec, x)
    s = nu[:, None] + nu[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(s > 0, s**alpha, 1.0 if alpha == 0 else 0.0) * np.exp(-t * s)
    total = float(np.sum(w * P))
    return total, total * t ** (alpha + spec.dim)


def k_upper(spec: TangentSpectrum, t: float, x: int, N_exponent: float) -> float:
    """``sum_{n,m} (lambda_n^{N/2} + lambda_m^{N/2}) e^{-t(lambda_n+lambda_m)} <X_n(x),X_m(x)>^2``."""
    _check_t(t)
    if not N_exponent > spec.dim / 2:
        raise PreconditionError(f"N_exponent must exceed d/2 = {spec.dim / 2}")
    nu, P = _block_grams(spec, x)
    p = np.clip(nu, 0, None) ** (N_exponent / 2)
    e = np.exp(-t * nu)
    w = (p[:, None] + p[None, :]) * np.outer(e, e)
    return float(np.sum(w * P))


def counting_function(spec: TangentSpectrum | ScalarSpectrum, lam: float) -> int:
    """``N(lam) = #{j : lambda_j <= lam}`` counted with multiplicity."""
    ev = spec.eigenvalues
    if lam >= ev[-1]:
        raise RangeError(f"lam={lam:g} reaches the truncation (largest retained eigenvalue {ev[-1]:g})")
    return int(np.searchsorted(ev, lam * (1 + 1e-12) + 1e-12, side="right"))


def mu_partial(spec: TangentSpectrum, x: int, lam: float) -> float:
    """``mu(lam) = sum_{lambda_n <= lam} |X_n(x)|^2``."""
    if not lam > 0:
        raise PreconditionError("lam must be positive")
    count = counting_function(spec, lam)
    return float(np.sum(spec.field_norms_sq(count)[x]))


def check_mu_bound(tangent: TangentSpectrum, scalar: ScalarSpectrum, x: int, lam: float, factor: float = 1.0) -> CheckReport:
    """``mu(lam) <= factor * e * k_M(1/lam, x, x)``.

    ``factor=1`` is the stated bound (sharp on the circle); ``factor=d``
    follows from the trace bound that holds on every model.
    """
    _same_manifold(tangent, scalar)
    mu = mu_partial(tangent, x, lam)
    km = scalar_kernel(scalar, 1 / lam, x, x)
    tail = float(scalar.diag_tail(1 / lam)[x])
    c = factor * math.e
    return CheckReport(
        "mu_bound",
        {"model": tangent.model.name, "x": x, "lam": lam, "factor": factor},
        mu,
        c * km,
        c * tail + 1e-12 * km,
    )


def span_residual(tangent: TangentSpectrum, f: np.ndarray, K: int) -> float:
    """Weighted L2 residual of projecting mean-free ``f`` onto products of fields.

    The spanning set is ``{<X_n, X_m> : n < m <= K}`` sampled on the cloud.
    Nested spans make the residual non-increasing in ``K``.
    """
    if K < 2:
        raise PreconditionError("K must be at least 2")
    if K > tangent.size:
        raise RangeError(f"K={K} exceeds the {tangent.size} retained fields")
    f = np.asarray(f, dtype=float)
    w = tangent.weights
    fc = f - np.sum(w * f) / np.sum(w)
    fx = tangent.fields[:, :K]
    n_idx, m_idx = np.triu_indices(K, 1)
    basis = np.einsum("ikd,ikd->ik", fx[:, n_idx], fx[:, m_idx])
    sw = np.sqrt(w)
    A = basis * sw[:, None]
    b = fc * sw
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    r = b - A @ coef
    return float(np.linalg.norm(r))


# --------------------------------------------------------------------------
# scaling-law fits
# --------------------------------------------------------------------------


def growth_lower_bound(spec: TangentSpectrum | ScalarSpectrum, dim: int, j_min: int = 10) -> float:
    """``inf_{j_min <= j <= N} lambda_j j^{-2/d}`` with 1-based ``j``."""
    ev = spec.eigenvalues
    j = np.arange(1, ev.size + 1)
    sel = j >= j_min
    if not np.any(sel):
        raise RangeError("truncation has fewer than j_min eigenvalues")
    return float(np.min(ev[sel] * j[sel] ** (-2.0 / dim)))


def fit_counting(spec: TangentSpectrum | ScalarSpectrum, dim: int, lam_max: float | None = None) -> tuple[float, float]:
    """Fit ``N(lam) <= c1 + c2 lam^{d/2}`` on the retained eigenvalues.

    ``c2`` is the least-squares slope of ``N`` against ``lam^{d/2}`` over the
    distinct levels below ``lam_max``; ``c1`` is the smallest intercept that
    makes the bound hold at every level.
    """
    ev = spec.eigenvalues
    top = ev[-1] if lam_max is None else lam_max
    levels = np.unique(ev[ev < top])
    counts = np.searchsorted(ev, levels * (1 + 1e-12) + 1e-12, side="right")
    u = levels ** (dim / 2)
    A = np.stack([np.ones_like(u), u], axis=1)
    (_, c2), *_ = np.linalg.lstsq(A, counts.astype(float), rcond=None)
    c1 = float(np.max(counts - c2 * u))
    return c1, float(c2)


def fit_scaling_constant(spec: TangentSpectrum, x: int, alpha: float, ts) -> float:
    """Largest ``sum(t) t^{alpha+d}`` over the grid ``ts`` (reported, not assumed)."""
    return max(weighted_diagonal_sum(spec, t, x, alpha)[1] for t in ts)


def fit_sphere_excess(d: int, ts) -> float:
    """Fitted ``b(d)`` in ``Z_{S^d(1)}(t) - 1 <= b(d) t^{-d/2}`` over ``ts``."""
    return max((models.sphere_partition(d, t) - 1) * t ** (d / 2) for t in ts)
