"""Vector diffusion distance between nearby points at small time.

For the flat torus the squared distance between x and x + v is compared with
the leading term 2 pi^2 |v|^2 / t^3.  With |v|^2/t held fixed the ratio is the
constant (1 - e^{-c})/c, c = |v|^2/(2t), so it tends to 1 only as c -> 0.
"""

import math

import numpy as np

from vectorheat import models, vdm

torus = models.make_model("flat_torus")
v0, t0 = 0.02, 0.05
rows = []
for k in range(4):
    t, v = t0 / 2**k, v0 / 2 ** (k / 2)
    rows.append((t, v))
pts = np.concatenate([[[0.0, 0.0], [v, 0.0]] for _, v in rows])
spec, _ = models.analytic_spectra(torus, 40000, models.cloud_from_points(torus, pts))
print(f"{'t':>8} {'|v|':>8} {'d^2':>12} {'pred^2':>12} {'ratio':>12} {'(1-e^-c)/c':>12}")
for k, (t, v) in enumerate(rows):
    d2 = vdm.vdm_distance(spec, t, 2 * k, 2 * k + 1) ** 2
    p2 = vdm.geodesic_prediction(torus, t, v) ** 2
    c = v * v / (2 * t)
    print(f"{t:8.5f} {v:8.5f} {d2:12.4f} {p2:12.4f} {d2 / p2:12.9f} {(1 - math.exp(-c)) / c:12.9f}")
