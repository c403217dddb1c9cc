"""Lumped-port behavior on canonical transmission-line structures.

Two experiments on real solver runs (a couple of minutes on a laptop):

1. a center-fed line with both ends in the absorber is a matched load,
   so the port voltage equals the incident (Thevenin half) voltage;
2. an open stub of length L returns its first reflection after 2L/v_phase.
"""

import math

import numpy as np

from patchsim import SimConfig, SourceWaveform, build_matched_line, build_open_stub
from patchsim.cavity import PatchModel, effective_permittivity
from patchsim.constants import C0
from patchsim.engine import run

print("matched line (center-fed, both ends absorbed):")
design = build_matched_line()
cfg = SimConfig(dxy=0.6e-3, dtype="float32", max_steps=3000, energy_threshold=0.0)
res = run(design, cfg)
t = res.port.times
late = t > cfg.waveform.end_time + 0.5e-9
resid = np.abs(res.port.v - res.port.v_inc)
print(f"  peak incident voltage  : {np.abs(res.port.v_inc).max():.4f} V")
print(f"  late-time |v - v_inc|  : {resid[late].max():.2e} V "
      f"({resid[late].max() / np.abs(res.port.v_inc).max() * 100:.3f}% of peak)")

print("\nopen stub (first echo at 2L/v_phase):")
length = 60e-3
stub = build_open_stub(length=length)
wf = SourceWaveform(f0=5e9, bandwidth=5.5e9)
cfg = SimConfig(dxy=0.6e-3, dtype="float32", max_steps=2200,
                energy_threshold=0.0, waveform=wf)
res = run(stub, cfg)
w = stub.layout.rects[0].width
eps_eff = effective_permittivity(PatchModel(w, length, 2.4e-3, 2.2))
t_expect = 2 * length / (C0 / math.sqrt(eps_eff))
resid = res.port.v - res.port.v_inc
t = res.port.times
# the tall thin port column is inductive, so a residual rides on the launch
# itself; the echo is the residual peak after the source envelope dies out
t_peak_inc = t[int(np.argmax(np.abs(res.port.v_inc)))]
window = t > t_peak_inc + 2.5 * wf.tau
i_echo = np.flatnonzero(window)[int(np.argmax(np.abs(resid[window])))]
print(f"  predicted round trip   : {t_expect * 1e9:.3f} ns "
      f"(eps_eff = {eps_eff:.3f})")
print(f"  measured first echo    : {(t[i_echo] - t_peak_inc) * 1e9:.3f} ns")
