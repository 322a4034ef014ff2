"""Heegner points and the spectral coefficient theta E_s.

Summing E_s over the Heegner points of discriminant d gives
(sqrt|d|/2)^s zeta(s) L(s, chi_d)/zeta(2s).  The demo checks that identity
against a direct lattice sum, then lists the first zeros of theta E on the
critical line for a two-term combination.
"""

import math
import warnings

from heegnerspec.eisenstein import eisenstein_direct_sum
from heegnerspec.heegner import ThetaCombination, heegner_set, theta_coefficient
from heegnerspec.zeros import theta_line_zeros

warnings.simplefilter("ignore", RuntimeWarning)  # close-pair notices from the line scans

for d in (-7, -23, -84):
    hs = heegner_set(d)
    pts = ", ".join(f"({x:+.4f}, {y:.4f})" for x, y in hs.points)
    print(f"d = {d}: h = {hs.h}, points {pts}")

s = 2.5
theta = ThetaCombination.single(-23)
direct = sum(eisenstein_direct_sum(complex(x, y), s, 400)[0] for x, y in heegner_set(-23).points)
print(f"\nlattice sum over the Heegner points of -23 at s = {s}: {direct.real:.10f}")
print(f"closed form (sqrt 23/2)^s zeta L / zeta(2s):          {theta_coefficient(theta, s).real:.10f}")

combo = ThetaCombination(((-7, 1.0), (-23, -0.5)))
print("\nzeros of (theta_-7 - theta_-23/2) E on the line in [2, 30]:")
print("  " + ", ".join(f"{z.t:.5f}" for z in theta_line_zeros(combo, 2.0, 30.0)))
print(f"  mean spacing near 30 is about pi/log 30 = {math.pi / math.log(30):.3f}")
