"""A radial bump pushes rho_k above its Besse value for k > k0.

The base is E(1,2) rescaled to common period 1.  A bump (1 + eps h) near a
regular fiber shortens the center orbit to 1 - eps c_minus, stretches every
orbit outside the bump by 1 + eps c_plus and adds only O(eps^2) volume.
For k above k0 the k-th period is set by the stretched orbits, so rho_k grows.
"""

from reebkit.harness import ExperimentConfig, run_bump_experiment

for k in (1, 2, 3):
    rep = run_bump_experiment(ExperimentConfig(k=k))
    print(f"k = {k} (k0 = {rep.rows[0]['k0']}), all checks pass: {rep.passed}")
    for r in rep.rows:
        print(f"  eps={r['eps']:.2f}  vol={r['vol_measured']:.9f} (predicted {r['vol_predicted']:.9f})"
              f"  center period={r['center_period']:.9f}  tau_k={r['tau_k_obs']:.6f}"
              f"  rho_k/base={r['rho_k_obs'] / r['rho_k_base']:.6f}  [{r['regime']}]")
    print()
