"""Near-to-far-field transform checked against the textbook dipole.

Exact near fields of an infinitesimal dipole are placed on a closed box
and transformed; the result must be the 1.5 (1.76 dBi) directivity with a
sin^2 theta pattern, and the radiated power must match the Poynting flux
through the same box.
"""

import math

from patchsim.constants import C0
from patchsim.farfield import dipole_surface, ntff, pattern_cut, poynting_power

f = 3.0e9
lam = C0 / f
surf = dipole_surface(f, half_size=0.22 * lam, n_cells=26)
pattern = ntff(surf, f)

d = pattern.directivity()
print(f"max directivity : {10 * math.log10(d.max()):.4f} dBi (exact: 1.7609)")
print(f"radiated power  : {pattern.radiated_power:.6e} W")
print(f"poynting flux   : {poynting_power(surf, f):.6e} W")

theta, cut = pattern_cut(pattern, "e-plane")
print("\nE-plane cut (directivity, dBi):")
for deg in (0, 30, 60, 90, 120, 150, 180):
    i = int(round(deg / 2))
    expect = 10 * math.log10(max(1.5 * math.sin(math.radians(deg)) ** 2, 1e-30))
    print(f"  theta = {deg:3d} deg: {cut[i]:8.2f}   (sin^2 law: {expect:8.2f})")
