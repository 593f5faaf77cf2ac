"""Exact period spectra of Besse ellipsoids and where rho_k peaks.

For a rational ellipsoid E(p, q) every Reeb orbit is closed.  The k-th
period tau_k and the ratio rho_k = tau_k^2 / vol are computed exactly from
the Seifert invariants.  rho_k reaches pq at k0 = p + q - 1, and for a few
values of k only one ellipsoid does so.
"""

from reebkit import ellipsoid_model, spectrum_table, diophantine_maximizers, spindle_model


def show(name, model, kmax):
    print(f"{name}: euler number {model.euler}, k0 = {model.k0}, volume = {model.volume}")
    for k, tau, rho in spectrum_table(model, kmax):
        mark = "  <- k0" if k == model.k0 else ""
        print(f"  k={k:2d}  tau_k={str(tau):>5}  rho_k={str(rho):>5}{mark}")


for p, q in [(1, 1), (1, 2), (2, 3), (1, 4)]:
    show(f"E({p},{q})", ellipsoid_model(p, q), 6)

show("spindle(1,2)", spindle_model(1, 2), 6)

print("\nEllipsoids with k0 = k (coprime p <= q, p + q - 1 = k):")
for k in range(1, 11):
    ms = diophantine_maximizers(k)
    tag = "unique" if len(ms) == 1 else f"{len(ms)} candidates"
    print(f"  k={k:2d}: {ms}  ({tag})")
