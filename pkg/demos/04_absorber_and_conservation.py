"""Solver trustworthiness in three quick experiments.

1. sealed PEC box: the staggered-grid energy is conserved to ~1e-14;
2. lossy fill: energy decays and never increases;
3. the convolutional absorber reflects below -40 dB (measured against a
   larger reference grid), and a weakened 1-cell absorber visibly fails.
"""

from patchsim.validation import (
    check_energy_conservation,
    check_lossy_decay,
    check_pml_reflection,
)

for result in (
    check_energy_conservation(steps=500),
    check_lossy_decay(steps=500),
    check_pml_reflection(),
    check_pml_reflection(thickness=1),  # deliberately broken absorber
):
    print(f"{result.name:22s} {result.status:5s} {result.detail}")

print("\nthe thickness-1 row is the fault-injection case: the reflection "
      "check is supposed to fail there.")
