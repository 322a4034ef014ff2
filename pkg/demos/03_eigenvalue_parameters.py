"""Eigenvalue parameters of the constrained Laplacian and their motion in a.

With theta = theta_{-7} and cut-off a = 2 the eigenvalue condition
cos(phi) J(tau) + sin(phi) |theta E|^2/(4 tau) = 0, phi = tau log a + psi(tau),
has exactly one root between consecutive constant-term zeros.  Raising a moves
every root down.
"""

from heegnerspec.analysis import dtau_da, interleave_check, track_eigen_root
from heegnerspec.heegner import ThetaCombination
from heegnerspec.specialfns import default_branch
from heegnerspec.spectral import QuadratureSpec, j_online

theta = ThetaCombination.single(-7)
q = QuadratureSpec()
branch = default_branch(31.0)
a = 2.0

print("J(tau) on the line:", ", ".join(f"J({t:.0f}) = {j_online(theta, t, q):+.5f}" for t in (6.0, 9.0, 12.0, 15.0)))

report = interleave_check(theta, a, 15.0, 25.0, q, branch)
print(f"\n{len(report.zeros)} eigenvalue parameters in [15, 25], {len(report.violations)} interleaving violations")
for r in report.zeros:
    slope = dtau_da(r.t, a, theta, q, branch)
    moved = track_eigen_root(theta, r.t, a, a + 1e-3, q, branch)
    print(f"  tau = {r.t:9.5f}   dtau/da = {slope:+8.4f}   tau at a + 0.001 = {moved:9.5f}")
