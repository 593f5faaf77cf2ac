"""First-return map of the bump model on a disk section.

The return map phi preserves the section's area form, and phi*nu - nu equals
d(tau) for the primitive nu, with tau the return time.  Integrating tau
against the area form recovers the contact volume.
"""

import numpy as np

from reebkit.charts import BumpSpec, bump_chart
from reebkit.reeb import contact_volume, exactness_defect, polar_grid, return_time_volume

spec = BumpSpec(0.05, 0.1, 0.35, 0.5 - np.pi * 0.35 ** 2)
chart = bump_chart(spec)

for n in (16, 32, 64):
    d = exactness_defect(chart, polar_grid(spec.rho, n, n))
    print(f"{n}x{n} grid: sup |phi*nu - nu - d tau| = {np.max(np.abs(d)):.2e}")

vt = return_time_volume(chart, alpha=1)
vc = contact_volume(chart, quad_tol=1e-9)
print(f"integral of return time = {vt:.12f}")
print(f"contact volume           = {vc:.12f}")
print(f"difference               = {abs(vt - vc):.2e}")
