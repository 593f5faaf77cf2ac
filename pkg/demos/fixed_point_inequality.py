"""Minimal action versus Calabi invariant for small disk Hamiltonians.

For eps H0 with H0 = (r^2 - 1)/2 the center is the fixed point of least
action a = -eps/2 and the Calabi invariant is -eps/4.  The inequality
a + a^2/2 <= Cal/2 holds with margin -eps/4 + eps^2/8, which vanishes as
eps -> 0.  Random small Hamiltonians show the two Calabi formulas agree.
"""

import numpy as np

from reebkit.surfaces import (DiskSurface, HamiltonianSystem, calabi, radial_quadratic, random_disk_hamiltonian,
                              verify_fixed_point_inequality)

disk = DiskSurface(1.0)
print("radial family:")
for eps in (0.2, 0.1, 0.05, 0.02, 0.01):
    rep = verify_fixed_point_inequality(HamiltonianSystem(disk, radial_quadratic(eps)), c=0.5)
    print(f"  eps={eps:.2f}  lhs={rep['lhs']:+.8f}  rhs={rep['rhs']:+.8f}  margin={rep['margin']:+.8f}"
          f"  closed form={-eps / 4 + eps ** 2 / 8:+.8f}")

print("random Hamiltonians (area-weighted vs action formula):")
for seed in range(5):
    H = random_disk_hamiltonian(np.random.default_rng(seed))
    ca, ch = calabi(HamiltonianSystem(disk, H), quad_tol=1e-9)
    print(f"  seed {seed}: {ca:+.10f}  {ch:+.10f}  diff {abs(ca - ch):.1e}")
