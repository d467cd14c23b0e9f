"""Heat traces of the tangent bundle versus the scalar heat trace.

On the circle and the flat torus the tangent bundle is trivial, so the
connection Laplacian is d copies of the scalar Laplacian and Z_TM = d Z_M.
The round sphere has no parallel fields and its ratio stays below 2,
tending to 0 as t grows.
"""

from vectorheat import heat, models

for kind in ("circle", "flat_torus", "sphere2"):
    model = models.make_model(kind)
    tangent, scalar = models.analytic_spectra(model, 2000, models.sample(model, 4))
    print(f"{model.name}")
    print(f"  {'t':>6} {'Z_TM':>14} {'Z_M':>14} {'ratio':>10}")
    for t in (0.1, 0.5, 1.0, 10.0):
        zt = heat.partition(tangent, t).value
        zm = heat.partition(scalar, t).value
        print(f"  {t:6.2f} {zt:14.8f} {zm:14.8f} {zt / zm:10.6f}")
