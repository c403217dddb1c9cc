"""Physical constants used throughout the solver (SI units)."""

from __future__ import annotations

import scipy.constants as _sc

C0 = _sc.c                      # speed of light in vacuum, m/s
EPS0 = _sc.epsilon_0            # vacuum permittivity, F/m
MU0 = _sc.mu_0                  # vacuum permeability, H/m
ETA0 = _sc.physical_constants["characteristic impedance of vacuum"][0]  # ohms
