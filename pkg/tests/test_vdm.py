import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from vectorheat import models, vdm
from vectorheat.errors import InputError, PreconditionError


def test_embedding_gram_identity(sphere_spectra):
    tangent, _ = sphere_spectra
    emb = vdm.embed(tangent, 0.5, K=tangent.boundaries()[6], points=[0, 5, 9])
    # <V(x), V(y)> = Vol^2 |k_K(x, y)|_HS^2 on the retained block
    small = tangent.truncate(emb.K)
    for a, x in enumerate(emb.points):
        for b, y in enumerate(emb.points):
            K = vdm.kernel_blocks(small, 0.5, [x], [y])[0, 0]
            assert emb.gram()[a, b] == pytest.approx(small.volume**2 * np.sum(K * K), rel=1e-10)


def test_embedding_tail_bound(torus_spectra):
    tangent, _ = torus_spectra
    full = vdm.embed(tangent, 0.3)
    part = vdm.embed(tangent, 0.3, K=tangent.boundaries()[4])
    dropped = np.sum(full.coords**2, axis=1) - np.sum(part.coords**2, axis=1)
    assert np.all(dropped <= part.tail_sq + 1e-12)


def test_embed_rejects_split_eigenspace(circle_spectra):
    tangent, _ = circle_spectra
    with pytest.raises(PreconditionError):
        vdm.embed(tangent, 1.0, K=2)


def test_torus_norms_are_constant(torus_spectra):
    tangent, _ = torus_spectra
    norms = np.linalg.norm(vdm.embed(tangent, 0.4).coords, axis=1)
    np.testing.assert_allclose(norms, norms[0], rtol=1e-10)


def test_sphere_large_time_collapses(sphere_spectra):
    # no parallel fields: every point tends to the origin
    tangent, _ = sphere_spectra
    norms = [np.linalg.norm(vdm.embed(tangent, t).coords, axis=1).max() for t in (1, 4, 16)]
    assert norms[0] > norms[1] > norms[2] and norms[2] < 1e-6


def test_distance_agrees_with_embedding(sphere_spectra, circle_spectra):
    for tangent, _ in (sphere_spectra, circle_spectra):
        emb = vdm.embed(tangent, 0.5, points=np.arange(12))
        direct = vdm.vdm_distances(tangent, 0.5, np.arange(12), np.arange(12))
        np.testing.assert_allclose(direct, cdist(emb.coords, emb.coords), atol=1e-9)
        assert vdm.vdm_distance(tangent, 0.5, 2, 7) == pytest.approx(direct[2, 7], abs=1e-12)


def test_distance_metric_properties(sphere_spectra):
    tangent, _ = sphere_spectra
    idx = np.arange(0, tangent.n, 37)
    D = vdm.vdm_distances(tangent, 0.3, idx, idx)
    np.testing.assert_allclose(D, D.T, atol=1e-12)
    np.testing.assert_array_equal(np.diag(D), 0)
    viol = D[:, :, None] + D[None, :, :] - D[:, None, :].transpose(0, 2, 1)
    assert viol.min() > -1e-9


def test_distance_rotation_invariance(sphere_spectra):
    tangent, _ = sphere_spectra
    rotated = vdm.apply_rotation(tangent, vdm.BasisRotation.random(tangent, seed=3))
    idx = np.arange(10)
    np.testing.assert_allclose(
        vdm.vdm_distances(tangent, 0.4, idx, idx), vdm.vdm_distances(rotated, 0.4, idx, idx), atol=1e-10
    )
    # the embedding itself moves by an orthogonal map: norms and Gram agree
    e1, e2 = vdm.embed(tangent, 0.4, points=idx), vdm.embed(rotated, 0.4, points=idx)
    np.testing.assert_allclose(e1.gram(), e2.gram(), atol=1e-10)
    assert not np.allclose(e1.coords, e2.coords)


def test_rotation_group_operations(sphere_spectra):
    tangent, _ = sphere_spectra
    R = vdm.BasisRotation.random(tangent, seed=1)
    I = R.compose(R.inverse())
    for b in I.blocks:
        np.testing.assert_allclose(b, np.eye(len(b)), atol=1e-12)
    with pytest.raises(InputError):
        vdm.BasisRotation([np.ones((2, 2))])
    with pytest.raises(InputError):
        vdm.apply_rotation(tangent, vdm.BasisRotation([np.eye(2)]))


def test_d_E_examples():
    assert vdm.basis_metric_d_E(np.eye(3), np.eye(3)) == 0
    assert vdm.basis_metric_d_E(np.eye(2), -np.eye(2)) == pytest.approx(2 * math.sqrt(2))
    a = 0.3
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    assert vdm.basis_metric_d_E(np.eye(2), R) == pytest.approx(2 * math.sqrt(2) * math.sin(a / 2))
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 4)))[0]
    assert vdm.basis_metric_d_E(Q, Q) == pytest.approx(0, abs=1e-12)
    assert vdm.basis_metric_d_E(Q, -Q) == pytest.approx(4)
    with pytest.raises(InputError):
        vdm.basis_metric_d_E(np.eye(2), np.eye(3))


def test_d_B(sphere_spectra, circle_spectra):
    tangent, _ = sphere_spectra
    I = vdm.BasisRotation.identity(tangent)
    R = vdm.BasisRotation.random(tangent, seed=5)
    assert vdm.basis_distance_d_B(I, I, tangent, 2) == 0
    d = vdm.basis_distance_d_B(I, R, tangent, 2)
    expected = math.sqrt(
        sum(nu**-2 * vdm.basis_metric_d_E(np.eye(len(b)), b) ** 2 for nu, b in zip(tangent.levels, R.blocks))
    )
    assert d == pytest.approx(expected)
    assert vdm.basis_distance_d_B(R, I, tangent, 2) == pytest.approx(d)
    with pytest.raises(PreconditionError):
        vdm.basis_distance_d_B(I, R, tangent, 1.0)

    circ, _ = circle_spectra
    Ic = vdm.BasisRotation.identity(circ)
    Rc = vdm.BasisRotation.random(circ, seed=2, fix_zero=True)
    with pytest.raises(PreconditionError):
        vdm.basis_distance_d_B(Ic, Rc, circ, 1)
    assert math.isfinite(vdm.basis_distance_d_B(Ic, Rc, circ, 1, zero_mode="skip"))
    flip = vdm.BasisRotation([-b if nu == 0 else b for nu, b in zip(circ.levels, Ic.blocks)])
    assert vdm.basis_distance_d_B(Ic, flip, circ, 1, zero_mode="skip") == math.inf


def test_d_B_tail_decreases(sphere_spectra):
    tangent, _ = sphere_spectra
    tails = [vdm.basis_distance_tail(tangent.truncate(k), 2) for k in tangent.boundaries()[5:9]]
    assert all(b < a for a, b in zip(tails, tails[1:]))


def test_geodesic_prediction_scaling(torus):
    p = vdm.geodesic_prediction(torus, 0.1, 0.05)
    assert vdm.geodesic_prediction(torus, 0.1, 0.025) == pytest.approx(p / 2)
    assert vdm.geodesic_prediction(torus, 0.05, 0.05) == pytest.approx(p * 2 ** 1.5)
    with pytest.raises(PreconditionError):
        vdm.geodesic_prediction(torus, 0.1, 0.2)
    with pytest.raises(PreconditionError):
        vdm.geodesic_prediction(torus, 0.6, 0.01)


def test_injectivity_on_circle(circle):
    cloud = models.sample(circle, 500)
    tangent, _ = models.analytic_spectra(circle, 81, cloud)
    emb = vdm.embed(tangent, 0.1)
    assert vdm.injectivity_margin(emb) > 0


def test_sobolev_h1(torus_spectra):
    tangent, _ = torus_spectra
    small = tangent.truncate(tangent.boundaries()[3])
    t = 0.4
    w = np.exp(-small.eigenvalues * t)
    f = small.fields[0]
    i = np.arange(1, small.size + 1) ** (2 / small.dim)
    G = f @ f.T
    naive = small.volume**2 * np.sum((1 + i[:, None] + i[None, :]) * np.outer(w, w) * G**2)
    assert vdm.sobolev_h1_norm(small, t, 0) == pytest.approx(naive, rel=1e-12)
    h = [vdm.sobolev_h1_norm(tangent, t, 0) for t in (0.05, 0.1, 0.2, 0.4)]
    for a, b in zip(h, h[1:]):
        assert a / b <= 2 ** (tangent.dim + 1) * 1.2
