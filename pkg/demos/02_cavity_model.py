"""The closed-form rectangular-patch model: analysis and synthesis.

Shows that the published 47.43 x 39.098 mm patch on 2.4 mm RT/duroid-class
laminate is a 2.5 GHz design by the standard cavity formulas, then sweeps
substrate height to show how the fringing correction moves the resonance.
"""

from patchsim import (
    PatchModel,
    design_patch,
    effective_permittivity,
    length_extension,
    resonant_frequency,
)

model = PatchModel(W=47.43e-3, L=39.098e-3, h=2.4e-3, eps_r=2.2)
eps_eff = effective_permittivity(model)
dl = length_extension(model, eps_eff)
f10 = resonant_frequency(model)

print("published base patch on eps_r = 2.2, h = 2.4 mm:")
print(f"  effective permittivity : {eps_eff:.4f}")
print(f"  open-end extension     : {dl * 1e3:.4f} mm per edge")
print(f"  fundamental resonance  : {f10 / 1e9:.4f} GHz")
print("  note: the published operating band is 4-4.5 GHz, so that band is")
print("  not this fundamental - the full-wave solver reports both.")

print("\nsynthesis round trip at 2.5 GHz:")
w, l = design_patch(2.5e9, 2.2, 2.4e-3)
print(f"  W = {w * 1e3:.3f} mm, L = {l * 1e3:.3f} mm "
      f"(table values: 47.43 / 39.098 mm)")
f_back = resonant_frequency(PatchModel(w, l, 2.4e-3, 2.2))
print(f"  re-analysis: {f_back / 1e9:.4f} GHz")

print("\nresonance vs substrate height (fixed patch):")
for h_mm in (0.8, 1.6, 2.4, 3.2):
    m = PatchModel(47.43e-3, 39.098e-3, h_mm * 1e-3, 2.2)
    print(f"  h = {h_mm:.1f} mm -> f10 = {resonant_frequency(m) / 1e9:.4f} GHz "
          f"(dL = {length_extension(m) * 1e3:.3f} mm)")
