"""Full-wave S11 and gain of a probe-fed patch, small enough to run in
about a minute, with optional matplotlib plots.

The same pipeline at higher fidelity drives the published designs:
    patchsim simulate --fixture simple_u --preset standard --out-dir out/
"""

from pathlib import Path

import numpy as np

from patchsim.config import RunConfig
from patchsim.fixtures import build_micro_patch
from patchsim.harness import cmd_simulate

out = Path("demo_out/micro_patch")
cfg = RunConfig(
    design=build_micro_patch(),
    design_ref="micro_patch",
    preset="explicit",
    dxy=1.0e-3,
    f_min=2.0e9,
    f_max=6.5e9,
    f_step=2.5e7,
    farfield=True,
)
summary = cmd_simulate(cfg, out, cache_dir="demo_out/cache", progress=True)

print("\nsummary:")
print(f"  termination : {summary['termination']} after {summary['steps']} steps")
print(f"  deepest dip : {summary['min_rl_db']:.2f} dB at "
      f"{summary['min_rl_f_hz'] / 1e9:.3f} GHz")
for r in summary["resonances"]:
    bw = r["bandwidth_10db_hz"]
    bw_txt = (f", -10 dB width {(bw[1] - bw[0]) / 1e6:.0f} MHz" if bw else "")
    gain_txt = (f", max gain {r['max_gain_dbi']:.2f} dBi" if r["max_gain_dbi"]
                is not None else "")
    print(f"  resonance {r['f_hz'] / 1e9:.3f} GHz, {r['rl_db']:.1f} dB{bw_txt}{gain_txt}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    freqs, rl = np.loadtxt(out / "return_loss.csv", delimiter=",", skiprows=1).T
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(freqs / 1e9, rl)
    ax.axhline(-10, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("return loss 20 log10 |S11| (dB)")
    ax.set_title("probe-fed demo patch")
    fig.tight_layout()
    fig.savefig(out / "return_loss.png", dpi=120)
    print(f"\nwrote {out / 'return_loss.png'}")

    cut = sorted(out.glob("cut_eplane_*.csv"))[0]
    theta, g = np.loadtxt(cut, delimiter=",", skiprows=1).T
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5, 5))
    ax.plot(np.radians(theta), g)
    ax.set_theta_zero_location("N")
    ax.set_title("E-plane gain cut (dBi)")
    fig.savefig(out / "eplane_cut.png", dpi=120)
    print(f"wrote {out / 'eplane_cut.png'}")
except ImportError:
    print("\nmatplotlib not installed; skipped plots "
          "(CSV outputs are in demo_out/micro_patch)")
