"""Scattering coefficient, the phase psi(t) and constant-term zeros.

On the critical line c_{1/2+it} = exp(-2 i psi(t)) has modulus one, so the
constant term y^s + c_s y^{1-s} at height a is a rotated cosine whose zeros
sit where t log a + psi(t) crosses a half-integer multiple of pi.
"""

import math

from heegnerspec.eisenstein import maass_selberg_norm
from heegnerspec.specialfns import default_branch, scattering_c
from heegnerspec.zeros import constant_term_phase, constant_term_zeros

s = complex(0.7, 3.0)
print(f"c_s c_(1-s) at s = {s}: {scattering_c(s) * scattering_c(1 - s):.15f}")
print(f"|c| on the line at t = 5: {abs(scattering_c(complex(0.5, 5.0))):.15f}")

branch = default_branch(101.0)
for t in (10.0, 50.0, 100.0):
    print(f"psi({t:5.1f}) = {branch.psi_at(t):9.4f}   psi'({t:5.1f}) = {branch.psi_prime(t):.4f}")

a = 2.0
zeros = constant_term_zeros(a, 5.0, 30.0, branch)
print(f"\nconstant-term zeros for a = {a} in [5, 30]:")
for z in zeros:
    phase = float(constant_term_phase(z.t, a, branch)) / math.pi
    print(f"  t = {z.t:10.6f}   phase/pi = {phase:8.4f}   norm 2 log a + 2 psi' = {maass_selberg_norm(z.t, a, branch):.4f}")
