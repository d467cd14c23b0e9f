import math

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff as scipy_directed

from vectorheat import models, specdist, vdm
from vectorheat.errors import InputError, PreconditionError


def small(spec, cap=30):
    return spec.truncate(max(k for k in spec.boundaries() if k <= cap))


def test_hausdorff_examples():
    assert specdist.hausdorff([[0.0], [1.0]], [[0.0], [1.0]]) == 0
    assert specdist.hausdorff([[0.0]], [[3.0], [4.0]]) == 4
    assert specdist.directed_hausdorff([[0.0]], [[3.0], [4.0]]) == 3
    assert specdist.hausdorff([[0, 0]], [[3, 4]]) == 5
    with pytest.raises(InputError):
        specdist.hausdorff(np.zeros((0, 2)), [[1, 1]])
    with pytest.raises(InputError):
        specdist.hausdorff([[0, 0]], [[1, 1, 1]])


def test_hausdorff_against_scipy():
    rng = np.random.default_rng(4)
    for _ in range(5):
        A, B = rng.standard_normal((300, 6)), rng.standard_normal((170, 6)) + 0.3
        ref = max(scipy_directed(A, B)[0], scipy_directed(B, A)[0])
        assert specdist.hausdorff(A, B) == pytest.approx(ref, rel=1e-13)


def test_hausdorff_metric_properties():
    rng = np.random.default_rng(1)
    A, B, C = (rng.standard_normal((40, 3)) for _ in range(3))
    assert specdist.hausdorff(A, A) == 0
    assert specdist.hausdorff(A, B) == specdist.hausdorff(B, A)
    assert specdist.hausdorff(A, C) <= specdist.hausdorff(A, B) + specdist.hausdorff(B, C) + 1e-12


@pytest.mark.parametrize("name", ["circle_spectra", "torus_spectra", "sphere_spectra"])
def test_continuity_squared_form(name, request):
    tangent, _ = request.getfixturevalue(name)
    spec = small(tangent)
    rng = np.random.default_rng(0)
    N = spec.dim / 2 + 1
    for k in range(15):
        a = vdm.BasisRotation.random(spec, seed=rng.integers(1 << 30), fix_zero=True)
        b = vdm.BasisRotation.random(spec, seed=rng.integers(1 << 30), fix_zero=True)
        if k % 5 == 0:
            b = a
        t, s = rng.uniform(0.1, 1.5, 2)
        x, y = rng.integers(spec.n, size=2)
        r = specdist.continuity_gap(spec, t, s, a, b, x, y, N)
        assert r.passed, r


def test_continuity_literal_form_fails_on_circle(circle_spectra):
    spec = small(circle_spectra[0])
    I = vdm.BasisRotation.identity(spec)
    r = specdist.continuity_gap(spec, 0.05, 0.05, I, I, 0, spec.n // 2, 1.0, form="literal")
    assert not r.passed


def test_align_budget_zero_is_identity(sphere_spectra):
    spec = small(sphere_spectra[0])
    a, b, hd = specdist.align_bases(spec, spec, 0.5, budget=0)
    for blk in b.blocks:
        np.testing.assert_array_equal(blk, np.eye(len(blk)))
    assert hd == pytest.approx(0, abs=1e-12)


def test_align_recovers_planted_rotation(sphere_spectra):
    spec = small(sphere_spectra[0])
    planted = vdm.apply_rotation(spec, vdm.BasisRotation.random(spec, seed=7))
    _, _, hd0 = specdist.align_bases(spec, planted, 0.5, budget=0)
    _, _, hd = specdist.align_bases(spec, planted, 0.5, budget=10)
    assert hd0 > 0.01 and hd < 1e-8


def test_align_monotone_in_budget(torus_spectra, sphere):
    A = small(torus_spectra[0])
    B, _ = models.analytic_spectra(sphere, 30, models.sample(sphere, 2 * 12**2))
    B = small(B)
    hds = [specdist.align_bases(A, B, 0.5, budget=k)[2] for k in (1, 5, 15)]
    assert hds[0] >= hds[1] >= hds[2]


def test_relabelled_torus_is_isometric():
    m1 = models.make_model("flat_torus", periods=[2 * math.pi, 4.0])
    m2 = models.make_model("flat_torus", periods=[4.0, 2 * math.pi])
    c1 = models.sample(m1, 256)
    c2 = models.cloud_from_points(m2, c1.points[:, ::-1], c1.weights)
    A, _ = models.analytic_spectra(m1, 30, c1)
    B, _ = models.analytic_spectra(m2, 30, c2)
    A, B = small(A), small(B)
    verdict, cert = specdist.isometry_test(A, B, 0.5, 0.01, budget=10)
    assert verdict == "isometric-consistent"
    assert cert.upper < 1e-6 and cert.lower <= cert.upper


def test_sphere_and_torus_are_distinct():
    sphere = models.make_model("sphere2")
    side = math.sqrt(sphere.volume)
    torus = models.make_model("flat_torus", periods=[side, side])
    S, _ = models.analytic_spectra(sphere, 30, models.sample(sphere, 2 * 12**2))
    T, _ = models.analytic_spectra(torus, 22, models.sample(torus, 256))
    verdict, cert = specdist.isometry_test(small(S), small(T), 0.5, 0.01, budget=4)
    assert verdict == "distinct"
    assert cert.lower > 0.1
    assert cert.upper >= cert.lower


def test_lower_bound_vanishes_on_identical_input(sphere_spectra):
    spec = small(sphere_spectra[0])
    assert specdist.invariant_lower_bound(spec, spec, 0.3) == pytest.approx(0, abs=1e-12)


def test_isometry_threshold_validation(circle_spectra):
    spec = small(circle_spectra[0])
    with pytest.raises(PreconditionError):
        specdist.isometry_test(spec, spec, 0.5, 0.0)


def test_mixed_dimensions_rejected(circle_spectra, torus_spectra):
    with pytest.raises(InputError):
        specdist.vector_spectral_distance(small(circle_spectra[0]), small(torus_spectra[0]), 0.5)
