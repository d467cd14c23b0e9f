"""Acceptance criteria 1-9; each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from vectorheat import discrete, heat, models, specdist, vdm


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def boundary_cap(spec, cap):
    return spec.truncate(max(k for k in spec.boundaries() if k <= cap))


def test_criterion_1_kato(report):
    start = time.perf_counter()
    worst = 0.0
    for kind, d, count in (("circle", 1, 2001), ("flat_torus", 2, 3000)):
        model = models.make_model(kind)
        tangent, scalar = models.analytic_spectra(model, count, models.sample(model, 4))
        for t in (0.1, 0.5, 1, 10):
            zt, zm = heat.partition(tangent, t).value, heat.partition(scalar, t).value
            worst = max(worst, abs(zt - d * zm) / (d * zm))
    sphere = models.make_model("sphere2")
    tangent, scalar = models.analytic_spectra(sphere, 800, models.sample(sphere, 8))
    strict = all(heat.check_kato(tangent, scalar, t).lhs < heat.check_kato(tangent, scalar, t).rhs for t in (0.1, 0.5, 1, 10))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and strict and elapsed < 1
    report(1, ok, f"max rel err {worst:.2e}, sphere strict={strict}, {elapsed:.2f}s")


def test_criterion_2_f_integral(report):
    start = time.perf_counter()
    err = max(
        abs(heat.f_integral(a, d) - heat.f_integral_quadrature(a, d)) / heat.f_integral(a, d)
        for a in (0, 0.5, 1, 2)
        for d in (1, 2, 3)
    )
    spots = [heat.f_integral(0, 1), heat.f_integral(1, 1), heat.f_integral(1, 2)]
    spot_ok = np.allclose(spots, [1, 4, 24], rtol=1e-12)
    elapsed = time.perf_counter() - start
    report(2, err <= 1e-8 and spot_ok and elapsed < 1, f"max rel err {err:.2e}, spots {spots}, {elapsed:.2f}s")


def test_criterion_3_small_time_asymptotics(report):
    start = time.perf_counter()
    torus = models.make_model("flat_torus")
    v, t = 0.02, 0.05
    steps = [(t / 2**k, v / 2 ** (k / 2)) for k in range(3)]
    pts = np.concatenate([[[0.0, 0.0], [vv, 0.0]] for _, vv in steps])
    spec, _ = models.analytic_spectra(torus, 30000, models.cloud_from_points(torus, pts))
    tail = spec.trace_tail(steps[-1][0])
    ratios = []
    for k, (tt, vv) in enumerate(steps):
        d = vdm.vdm_distance(spec, tt, 2 * k, 2 * k + 1)
        ratios.append(d**2 / vdm.geodesic_prediction(torus, tt, vv) ** 2)
    gaps = [abs(r - 1) for r in ratios]
    # ratio is (1 - e^{-c})/c with c = |v|^2/(2t): constant under the halving
    monotone = all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))
    elapsed = time.perf_counter() - start
    ok = tail < 1e-10 and abs(ratios[0] - 1) <= 0.2 and monotone and elapsed < 30
    report(3, ok, f"d^2/pred^2 = {', '.join(f'{r:.10f}' for r in ratios)}, tail {tail:.1e}, {elapsed:.1f}s")


def test_criterion_4_discrete_oracle(report):
    start = time.perf_counter()
    circle = models.make_model("circle")
    cloud = models.sample(circle, 2000)
    tangent, _ = discrete.discrete_spectra(cloud, discrete.default_bandwidth(cloud), 5, which="connection")
    ref = np.array([0.0, 1, 1, 4, 4])
    err_c = np.max(np.abs(tangent.eigenvalues - ref) / np.maximum(ref, 1))
    sphere = models.make_model("sphere2")
    cloud = models.sample(sphere, 4000)
    tangent, _ = discrete.discrete_spectra(cloud, discrete.default_bandwidth(cloud), 1, which="connection")
    err_s = abs(tangent.eigenvalues[0] - 1.0)
    elapsed = time.perf_counter() - start
    ok = err_c <= 0.05 and err_s <= 0.10 and elapsed < 120
    report(4, ok, f"circle rel err {err_c:.2e}, sphere first {tangent.eigenvalues[0]:.5f}, {elapsed:.1f}s")


def test_criterion_5_basis_invariance(report, circle_spectra, torus_spectra):
    rng = np.random.default_rng(5)
    worst = 0.0
    for tangent, _ in (circle_spectra, torus_spectra):
        xs, ys = rng.integers(tangent.n, size=(2, 100))
        base = np.array([vdm.vdm_distance(tangent, 0.3, x, y) for x, y in zip(xs, ys)])
        for _ in range(20):
            rot = vdm.apply_rotation(tangent, vdm.BasisRotation.random(tangent, rng))
            emb = vdm.embed(rot, 0.3)
            d = np.linalg.norm(emb.coords[xs] - emb.coords[ys], axis=1)
            worst = max(worst, float(np.max(np.abs(d - base))))
    report(5, worst <= 1e-9, f"max |delta| {worst:.2e} over 2 x 20 rotations x 100 pairs")


def test_criterion_6_continuity(report, circle_spectra, torus_spectra, sphere_spectra):
    rng = np.random.default_rng(6)
    summary = []
    ok = True
    for tangent, _ in (circle_spectra, torus_spectra, sphere_spectra):
        spec = boundary_cap(tangent, 60)
        N = spec.dim / 2 + 0.5
        margins = []
        for _ in range(200):
            a = vdm.BasisRotation.random(spec, rng, fix_zero=True)
            b = a if rng.random() < 0.2 else vdm.BasisRotation.random(spec, rng, fix_zero=True)
            t, s = rng.uniform(0.05, 2.0, 2)
            x, y = (int(i) for i in rng.integers(spec.n, size=2))
            r = specdist.continuity_gap(spec, t, s, a, b, x, y, N)
            margins.append(r.margin + r.tolerance)
            ok &= r.passed
        summary.append(f"{spec.model.kind} min margin {min(margins):.2e}")
    report(6, ok, "; ".join(summary) + " (200 configs each)")


def test_criterion_7_trace_comparison(report, circle_spectra, torus_spectra):
    trace_ok, hs_ok, ratios = True, True, []
    for tangent, scalar in (circle_spectra, torus_spectra):
        model = tangent.model
        eps, alpha = models.default_comparison(model)
        for t in (0.1, 1, 10):
            trace_ok &= heat.check_trace_comparison(model, scalar, t, eps, alpha).passed
            r = heat.check_hs_diagonal(tangent, scalar, t)
            hs_ok &= r.passed
            ratios.append(r.extra["max_ratio"])
    detail = f"trace comparison {'holds' if trace_ok else 'fails'}; max |k_TM|_HS / k_M = {max(ratios):.6f}"
    report(7, trace_ok and hs_ok, detail)


def test_criterion_8_spectral_distance(report, sphere_spectra):
    start = time.perf_counter()
    base = boundary_cap(sphere_spectra[0], 30)
    planted = vdm.apply_rotation(base, vdm.BasisRotation.random(base, seed=8))
    up_planted = specdist.vector_spectral_distance(base, planted, 0.5, budget=10).upper

    m1 = models.make_model("flat_torus", periods=[2 * math.pi, 4.0])
    m2 = models.make_model("flat_torus", periods=[4.0, 2 * math.pi])
    c1 = models.sample(m1, 256)
    c2 = models.cloud_from_points(m2, c1.points[:, ::-1], c1.weights)
    A = boundary_cap(models.analytic_spectra(m1, 30, c1)[0], 30)
    B = boundary_cap(models.analytic_spectra(m2, 30, c2)[0], 30)
    up_relabel = specdist.vector_spectral_distance(A, B, 0.5, budget=10).upper

    sphere = models.make_model("sphere2")
    side = math.sqrt(sphere.volume)
    torus = models.make_model("flat_torus", periods=[side, side])
    S = boundary_cap(models.analytic_spectra(sphere, 30, models.sample(sphere, 2 * 12**2))[0], 30)
    T = boundary_cap(models.analytic_spectra(torus, 22, models.sample(torus, 256))[0], 30)
    lower = specdist.vector_spectral_distance(S, T, 0.5, budget=4).lower
    elapsed = time.perf_counter() - start
    ok = up_planted <= 1e-4 and up_relabel <= 1e-4 and lower > 0.01 and elapsed < 300
    report(8, ok, f"planted {up_planted:.1e}, relabeled {up_relabel:.1e}, sphere/torus lower {lower:.4f}, {elapsed:.1f}s")


def test_criterion_9_eigenvalue_growth(report):
    parts = []
    ok = True
    for kind, d in (("circle", 1), ("flat_torus", 2), ("sphere2", 2)):
        model = models.make_model(kind)
        big, _ = models.analytic_spectra(model, 1200, models.sample(model, 4))
        g = heat.growth_lower_bound(big, d)
        c2a = heat.fit_counting(big.truncate(max(k for k in big.boundaries() if k <= 600)), d)[1]
        c2b = heat.fit_counting(big, d)[1]
        drift = abs(c2a - c2b) / c2b
        ok &= g > 0 and drift <= 0.10
        parts.append(f"{kind} inf {g:.3f} c2 {c2a:.4f}/{c2b:.4f}")
    report(9, ok, "; ".join(parts))
