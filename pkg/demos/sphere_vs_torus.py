"""Vector spectral distance certificates.

A relabelled copy of a non-square torus is recognised as isometric by the
alignment search, while the sphere and a torus of the same area are
separated by the basis-free witness |V_t(x)| = Vol |k_TM(t,x,x)|_HS.
"""

import math

from vectorheat import models, specdist


def spectra(model, n, count):
    tangent, _ = models.analytic_spectra(model, count, models.sample(model, n))
    return tangent.truncate(max(k for k in tangent.boundaries() if k <= 30))


m1 = models.make_model("flat_torus", periods=[2 * math.pi, 4.0])
m2 = models.make_model("flat_torus", periods=[4.0, 2 * math.pi])
c1 = models.sample(m1, 256)
A = models.analytic_spectra(m1, 30, c1)[0].truncate(30)
B = models.analytic_spectra(m2, 30, models.cloud_from_points(m2, c1.points[:, ::-1], c1.weights))[0].truncate(30)
verdict, cert = specdist.isometry_test(A, B, 0.5, threshold=0.01, budget=10)
print(f"torus vs relabelled torus: {verdict}  lower={cert.lower:.2e} upper={cert.upper:.2e}")

sphere = models.make_model("sphere2")
side = math.sqrt(sphere.volume)
torus = models.make_model("flat_torus", periods=[side, side])
for t in (0.25, 0.5, 1.0):
    verdict, cert = specdist.isometry_test(spectra(sphere, 288, 30), spectra(torus, 256, 22), t, 0.01, budget=4)
    print(f"sphere vs torus, t={t}: {verdict}  lower={cert.lower:.4f} upper={cert.upper:.4f}")
