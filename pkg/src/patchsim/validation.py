"""Self-validation: oracle-backed physics checks and the reproduction report.

Every check returns a CheckResult; cmd_validate prints them as a table and
exits nonzero if any hard check fails.  The acceptance test suite calls the
same functions, so the CLI and pytest agree by construction.

The published headline numbers (-38/-43 dB dips, 7.834/8.99 dBi gains) come
from an unnamed commercial solver with unpublished mesh and feed details;
dip depth is hypersensitive to both, so the published-design checks assert
the comparative claims only and the absolute numbers go into an
informational report.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectra
from .cavity import PatchModel, resonant_frequency
from .config import RunConfig
from .constants import C0, ETA0
from .cpml import _unchecked_cpml
from .engine import SimConfig, Stepper, run as engine_run
from .farfield import dipole_surface, ntff, poynting_power
from .fixtures import (
    build_matched_line,
    build_micro_patch,
    build_modified_u_patch,
    build_plain_patch,
    build_simple_u_patch,
)
from .grid import GridSpec, cfl_limit, material_grid_from_cells, uniform_material_grid
from .harness import cmd_simulate, write_json
from .source import SourceWaveform

PAPER_VALUES = {
    "band_ghz": (4.0, 4.5),
    "simple_u": {"min_rl_db": -38.0, "max_gain_dbi": 7.834},
    "modified_u": {"min_rl_db": -43.0, "max_gain_dbi": 8.99},
    "oracle_fundamental_ghz": 2.50,
}


@dataclass
class CheckResult:
    name: str
    passed: bool | None          # None = informational
    hard: bool
    detail: str
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.passed is None:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


# ------------------------------------------------------------ small builders

def _quasi_1d_spec(nz: int, dz: float, courant: float = 0.99,
                   transverse: float = 50.0) -> GridSpec:
    d_t = transverse * dz
    dt = courant * cfl_limit(d_t, d_t, dz)
    return GridSpec(d_t, d_t, dz, 3, 3, nz, dt)


def _slab_reflection_sim(nz: int, dz: float, eps_r: float, slab_cells: tuple[int, int],
                         steps: int, with_slab: bool) -> np.ndarray:
    """Quasi-1D slab run; returns Ex at the probe plane for every step."""
    spec = _quasi_1d_spec(nz, dz)
    eps = np.ones((3, 3, nz))
    if with_slab:
        eps[:, :, slab_cells[0]:slab_cells[1]] = eps_r
    mats = material_grid_from_cells(spec, eps)
    st = Stepper(spec, mats, boundaries=("mirror", "mirror", "cpml"))
    wf = SourceWaveform(f0=5.0e9, bandwidth=5.5e9)
    k_src, k_probe = 20, nz // 4
    rec = np.empty(steps)
    for n in range(steps):
        t = (st.fields.step + 0.5) * spec.dt
        st.fields.ex[:, :, k_src] += st.fields.ex.dtype.type(wf(t))
        st.step()
        rec[n] = st.fields.ex[0, 1, k_probe]
    return rec


def _slab_reflection_error(dz: float) -> float:
    """Max |R| error against the analytic two-interface formula, 3-7 GHz."""
    eps_r = 4.0
    d_slab = 12.0e-3
    z_slab = 60.0e-3
    length = 160.0e-3
    nz = int(round(length / dz))
    k1 = int(round(z_slab / dz))
    k2 = k1 + int(round(d_slab / dz))
    steps = int(round(3.2e-9 * C0 / dz / 0.99))  # same physical duration per dz
    inc = _slab_reflection_sim(nz, dz, eps_r, (k1, k2), steps, with_slab=False)
    tot = _slab_reflection_sim(nz, dz, eps_r, (k1, k2), steps, with_slab=True)
    spec = _quasi_1d_spec(nz, dz)
    freqs = np.linspace(3e9, 7e9, 21)
    sig = dict(dt=spec.dt, t0=spec.dt)
    r_inc = spectra.dft(spectra.TimeSignal(inc, **sig), freqs)
    r_ref = spectra.dft(spectra.TimeSignal(tot - inc, **sig), freqs)
    r_sim = np.abs(r_ref.values / r_inc.values)

    n = math.sqrt(eps_r)
    r12 = (1.0 - n) / (1.0 + n)
    beta = 2.0 * math.pi * freqs * n / C0
    ph = np.exp(-2j * beta * d_slab)
    r_an = np.abs(r12 * (1.0 - ph) / (1.0 - r12 ** 2 * ph))
    return float(np.max(np.abs(r_sim - r_an)))


# ------------------------------------------------------------------- checks

def check_cavity_roundtrip() -> CheckResult:
    """Synthesize-then-analyze closes to 0.5% across the documented grid."""
    from .cavity import design_patch

    worst = 0.0
    for f in (1e9, 2.5e9, 5e9, 8e9):
        for er in (1.0, 2.2, 4.4):
            for h in (0.8e-3, 1.6e-3, 2.4e-3):
                w, l = design_patch(f, er, h)
                f_back = resonant_frequency(PatchModel(w, l, h, er))
                worst = max(worst, abs(f_back - f) / f)
    return CheckResult(
        "cavity_roundtrip", worst < 5e-3, True,
        f"worst synthesize/analyze closure {worst * 100:.3f}% (limit 0.5%)",
        {"worst_rel": worst},
    )


def check_fixture_geometry() -> CheckResult:
    """Published-table areas and raster convergence on both layouts."""
    from .geometry import conductor_mask, layout_area

    simple = build_simple_u_patch()
    modified = build_modified_u_patch()
    a_simple = layout_area(simple.layout)
    a_modified = layout_area(modified.layout)
    expect_simple = (47.43 * 39.098 - 2 * 20 * 3 - 29 * 0.7 + 28.1 * 3) * 1e-6
    stub_area = 4.0e-3 * sum((0.5, 1.4, 0.5, 2.0, 0.5, 1.4, 2.0)) * 1e-3
    ok = math.isclose(a_simple, expect_simple, rel_tol=1e-12)
    ok &= math.isclose(a_simple - a_modified, stub_area, rel_tol=1e-9)
    # Staircase area error is O(perimeter * res) but oscillates with edge
    # alignment, so monotonicity is asserted per two halvings, plus overall.
    for layout, exact in ((simple.layout, a_simple), (modified.layout, a_modified)):
        errs = [abs(conductor_mask(layout, res).area() - exact) / exact
                for res in (1e-3, 0.5e-3, 0.25e-3, 0.125e-3)]
        ok &= all(errs[i + 2] < errs[i] for i in range(len(errs) - 2))
        ok &= errs[-1] < 5e-3 and errs[-1] < errs[0]
    return CheckResult(
        "fixture_geometry", bool(ok), True,
        f"areas {a_simple * 1e6:.2f}/{a_modified * 1e6:.2f} mm^2, "
        f"raster errors {['%.2e' % e for e in errs]}",
        {"raster_errors": errs},
    )


def check_source_spectrum() -> CheckResult:
    wf = SourceWaveform()
    rel_dc = wf.spectrum_rel(0.0)
    rel_2f0 = wf.spectrum_rel(2 * wf.f0)
    worst_db = 20 * math.log10(max(rel_dc, rel_2f0, 1e-300))
    return CheckResult(
        "source_spectrum", worst_db < -60.0, True,
        f"DC/2f0 suppression {worst_db:.1f} dB (limit -60 dB)",
        {"worst_db": worst_db},
    )


def check_energy_conservation(steps: int = 1000) -> CheckResult:
    """Sealed lossless PEC box: staggered energy constant to 1e-10."""
    n = 24
    d = 1e-3
    spec = GridSpec(d, d, d, n, n, n, 0.99 * cfl_limit(d, d, d))
    st = Stepper(spec, uniform_material_grid(spec), boundaries=("pec", "pec", "pec"))
    rng = np.random.default_rng(7)
    st.fields.ex[:, 1:-1, 1:-1] = rng.normal(0, 1e-3, st.fields.ex[:, 1:-1, 1:-1].shape)
    st.fields.ey[1:-1, :, 1:-1] = rng.normal(0, 1e-3, st.fields.ey[1:-1, :, 1:-1].shape)
    st.fields.ez[1:-1, 1:-1, :] = rng.normal(0, 1e-3, st.fields.ez[1:-1, 1:-1, :].shape)
    u = [st.step(probe_energy=True) for _ in range(steps)]
    drift = (max(u) - min(u)) / u[0]
    return CheckResult(
        "energy_conservation", drift < 1e-10, True,
        f"relative energy drift {drift:.2e} over {steps} steps (limit 1e-10)",
        {"drift": drift},
    )


def check_lossy_decay(steps: int = 800) -> CheckResult:
    """With conductivity everywhere and no source, energy never increases."""
    n = 20
    d = 1e-3
    spec = GridSpec(d, d, d, n, n, n, 0.99 * cfl_limit(d, d, d))
    mats = uniform_material_grid(spec, eps_r=2.2, sigma=5e-3)
    st = Stepper(spec, mats, boundaries=("pec", "pec", "pec"))
    rng = np.random.default_rng(11)
    st.fields.ex[:, 1:-1, 1:-1] = rng.normal(0, 1e-3, st.fields.ex[:, 1:-1, 1:-1].shape)
    u = np.array([st.step(probe_energy=True) for _ in range(steps)])
    ratios = u[1:] / u[:-1]
    ok = bool(np.all(ratios <= 1.0 + 1e-12)) and u[-1] < u[0]
    return CheckResult(
        "lossy_decay", ok, True,
        f"max step ratio {ratios.max():.12f}, total decay {u[-1] / u[0]:.2e}",
        {"max_ratio": float(ratios.max())},
    )


def check_magic_timestep() -> CheckResult:
    """Quasi-1D pulse at the 1-D Courant limit translates one cell per step."""
    nz = 400
    dz = 1e-3
    spec = _quasi_1d_spec(nz, dz, courant=1.0, transverse=1e6)
    st = Stepper(spec, uniform_material_grid(spec), boundaries=("mirror", "mirror", "pec"))
    z = np.arange(nz + 1) * dz
    zc = 120 * dz
    w = 15 * dz
    g = np.exp(-(((z - zc) / w) ** 2))
    st.fields.ex[:, :, :] = g[None, None, :]
    st.fields.hy[:, :, :] = (np.exp(-(((z[1:] - zc) / w) ** 2)) / ETA0)[None, None, :]
    m = 150
    for _ in range(m):
        st.step()
    expect = np.exp(-(((z - zc - m * dz) / w) ** 2))
    err = float(np.max(np.abs(st.fields.ex[0, 1, :] - expect)))
    return CheckResult(
        "magic_timestep", err < 1e-9, True,
        f"max translation error {err:.2e} after {m} steps (limit 1e-9)",
        {"err": err},
    )


def check_slab_convergence() -> CheckResult:
    """Criterion 5: 1-D slab reflection error drops x(4 +- 1) when dz halves."""
    e_coarse = _slab_reflection_error(1.0e-3)
    e_fine = _slab_reflection_error(0.5e-3)
    ratio = e_coarse / e_fine
    ok = 3.0 <= ratio <= 5.0
    return CheckResult(
        "slab_convergence", ok, True,
        f"|R| error {e_coarse:.2e} -> {e_fine:.2e}, ratio {ratio:.2f} (want 4 +- 1)",
        {"ratio": ratio, "errors": [e_coarse, e_fine]},
    )


def check_pml_reflection(thickness: int = 10, limit_db: float = -40.0) -> CheckResult:
    """Criterion 3: vacuum point-source reflection from the absorber, probed
    3/4 of the way to the wall, against a big-grid reference."""
    params = _unchecked_cpml(thickness=thickness)
    d = 1e-3
    dt = 0.99 * cfl_limit(d, d, d)
    interior = 20  # center-to-absorber distance in the small grid

    def probe_run(n, steps, probe_off):
        spec = GridSpec(d, d, d, n, n, n, dt)
        st = Stepper(spec, uniform_material_grid(spec),
                     cpml_params=params, boundaries=("cpml", "cpml", "cpml"))
        c = n // 2
        tau = 12 * dt
        t0 = 5 * tau
        rec = np.empty(steps)
        for s in range(steps):
            t = (st.fields.step + 0.5) * dt
            st.fields.ez[c, c, c] += math.exp(-(((t - t0) / tau) ** 2))
            st.step()
            rec[s] = st.fields.ez[c + probe_off, c, c]
        return rec

    steps = 300
    probe_off = int(0.75 * interior)
    small = probe_run(2 * (interior + thickness), steps, probe_off)
    big = probe_run(140, steps, probe_off)
    refl_db = 20 * math.log10(np.abs(small - big).max() / np.abs(big).max())
    return CheckResult(
        "pml_reflection", refl_db <= limit_db, True,
        f"boundary reflection {refl_db:.1f} dB (limit {limit_db:.0f} dB, "
        f"thickness {thickness})",
        {"reflection_db": refl_db},
    )


def check_dipole_ntff() -> CheckResult:
    """Criterion 2: transform of analytic dipole near fields gives the 1.5
    (1.76 dBi) directivity and the sin^2 pattern; the transform's radiated
    power matches the Poynting flux through the same box."""
    f = 3.0e9
    lam = C0 / f
    surf = dipole_surface(f, half_size=0.22 * lam, n_cells=26)
    pattern = ntff(surf, f)
    d = pattern.directivity()
    d_max_db = 10 * math.log10(d.max())
    shape = d / d.max()
    target = np.sin(pattern.theta)[:, None] ** 2 * np.ones_like(pattern.phi)[None, :]
    rms = float(np.sqrt(np.mean((shape - target) ** 2)))
    p_flux = poynting_power(surf, f)
    p_err = abs(pattern.radiated_power - p_flux) / p_flux
    ok = abs(d_max_db - 1.7609) < 0.1 and rms < 0.02 and p_err < 0.01
    return CheckResult(
        "dipole_ntff", ok, True,
        f"max directivity {d_max_db:.3f} dBi (want 1.761 +- 0.1), "
        f"sin^2 RMS {rms * 100:.2f}% (limit 2%), power closure {p_err * 100:.2f}%",
        {"d_max_db": d_max_db, "shape_rms": rms, "power_err": p_err},
    )


def check_matched_line() -> CheckResult:
    """Port driving a matched line (both halves run into the absorber):
    late-time reflected voltage under 1% of the incident peak."""
    design = build_matched_line()
    # threshold 0 keeps it running to max_steps so a late window exists
    cfg = SimConfig(dxy=0.6e-3, dtype="float32", max_steps=3000, energy_threshold=0.0)
    res = engine_run(design, cfg)
    wf = cfg.waveform
    t = res.port.times
    late = t > wf.end_time + 0.5e-9
    resid = np.abs(res.port.v - res.port.v_inc)[late].max()
    peak = np.abs(res.port.v_inc).max()
    ratio = resid / peak
    return CheckResult(
        "matched_line_port", ratio < 0.01, True,
        f"late reflected voltage {ratio * 100:.2f}% of incident peak (limit 1%)",
        {"ratio": ratio},
    )


def check_reciprocity() -> CheckResult:
    """Swap a soft source and probe around a dielectric block in a sealed
    box; the two transfer records agree to 1e-6 relative."""
    n = (30, 26, 22)
    d = 1e-3
    spec = GridSpec(d, d, d, *n, 0.99 * cfl_limit(d, d, d))
    eps = np.ones(n)
    eps[10:18, 8:16, 6:14] = 3.0
    mats_proto = eps  # cells reused for both runs
    a = (6, 6, 11)
    b = (24, 20, 11)
    wf = SourceWaveform(f0=5e9, bandwidth=5.5e9)
    steps = 700

    def transfer(src, dst):
        mats = material_grid_from_cells(spec, mats_proto)
        st = Stepper(spec, mats, boundaries=("pec", "pec", "pec"))
        rec = np.empty(steps)
        for s in range(steps):
            t = (st.fields.step + 0.5) * spec.dt
            st.fields.ez[src] += st.fields.ez.dtype.type(wf(t))
            st.step()
            rec[s] = st.fields.ez[dst]
        return rec

    ab = transfer(a, b)
    ba = transfer(b, a)
    err = float(np.max(np.abs(ab - ba)) / np.max(np.abs(ab)))
    return CheckResult(
        "reciprocity", err < 1e-6, True,
        f"A->B vs B->A transfer mismatch {err:.2e} (limit 1e-6)",
        {"err": err},
    )


def check_thread_determinism(out_root=None) -> CheckResult:
    """Criterion 8: byte-identical .s1p and summary across thread counts."""
    import numba
    import tempfile
    from pathlib import Path

    n_threads = min(2, numba.config.NUMBA_NUM_THREADS)
    base = RunConfig(
        design=build_micro_patch(), design_ref="micro_patch",
        preset="explicit", dxy=1.0e-3, f_min=2e9, f_max=12e9, f_step=2.5e7,
        farfield=True, max_steps=20000,
    )
    with tempfile.TemporaryDirectory(dir=out_root) as tmp:
        tmp = Path(tmp)
        s1 = cmd_simulate(replace(base, threads=1), tmp / "t1", log=lambda *a: None)
        s2 = cmd_simulate(replace(base, threads=n_threads), tmp / "tn", log=lambda *a: None)
        same_s1p = (tmp / "t1" / "s11.s1p").read_bytes() == (tmp / "tn" / "s11.s1p").read_bytes()
        same_sum = (tmp / "t1" / "summary.json").read_bytes() == \
                   (tmp / "tn" / "summary.json").read_bytes()
    ok = bool(same_s1p and same_sum and s1 == s2)
    return CheckResult(
        "thread_determinism", ok, True,
        f"1 vs {n_threads} threads: s1p identical={same_s1p}, summary identical={same_sum}",
        {"threads": n_threads},
    )


GOLDEN_TOUCHSTONE = (
    "# HZ S RI R 50\n"
    "1.000000000e+09 5.000000000000e-01 0.000000000000e+00\n"
    "2.000000000e+09 -2.500000000000e-01 1.000000000000e-01\n"
    "3.000000000e+09 1.000000000000e-04 -1.000000000000e-05\n"
)


def check_touchstone_golden(tmp_dir=None) -> CheckResult:
    """Criterion 9a: writer output is byte-stable against the frozen form."""
    import tempfile
    from pathlib import Path

    s = spectra.Spectrum(np.array([1e9, 2e9, 3e9]),
                         np.array([0.5 + 0j, -0.25 + 0.1j, 1e-4 - 1e-5j]))
    with tempfile.TemporaryDirectory(dir=tmp_dir) as tmp:
        p = Path(tmp) / "golden.s1p"
        spectra.write_touchstone(p, s, 50.0)
        text = p.read_text()
    return CheckResult(
        "touchstone_golden", text == GOLDEN_TOUCHSTONE, True,
        "touchstone writer matches the frozen golden bytes",
    )


def check_config_roundtrip() -> CheckResult:
    """Criterion 9b: serialize -> parse is the identity on both fixtures."""
    from .config import parse_config, serialize_design

    ok = True
    for design in (build_simple_u_patch(), build_modified_u_patch()):
        text = serialize_design(design)
        again = parse_config(text).design
        ok &= again == design
        ok &= serialize_design(again) == text
    return CheckResult(
        "config_roundtrip", bool(ok), True,
        "parse(serialize(design)) reproduces both fixtures exactly",
    )


# ------------------------------------------------------- slow solver checks

def oracle_patch_config(preset: str = "standard") -> RunConfig:
    return RunConfig(
        design=build_plain_patch(), design_ref="oracle_patch", preset=preset,
        f_min=1.5e9, f_max=3.5e9, f_step=5e6, farfield=False,
        band=(2.25e9, 2.75e9),
    )


def check_oracle_resonance(preset: str = "standard", cache_dir=None, out_dir=None,
                           log=print) -> CheckResult:
    """Criterion 1: full-wave resonance of the synthesized plain patch within
    5% of the cavity model.  The 15-minute budget is stated for 8 desktop
    cores; on smaller machines it scales by 8/cores (measured time always
    reported)."""
    import tempfile
    from pathlib import Path

    design = build_plain_patch()
    w = design.layout.rects[0].width
    l = design.layout.rects[0].height
    f_oracle = resonant_frequency(PatchModel(w, l, 2.4e-3, 2.2))

    cfg = oracle_patch_config(preset)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(out_dir) if out_dir else Path(tmp) / "oracle"
        summary = cmd_simulate(cfg, out, cache_dir=cache_dir, progress=True, log=log)
        timing = (out / "timing.json")
        runtime = None
        if timing.exists():
            import json

            runtime = json.loads(timing.read_text()).get("runtime_s")

    if not summary["resonances"]:
        return CheckResult("oracle_resonance", False, True,
                           "no resonance below -10 dB found", {})
    f_sim = min((r["f_hz"] for r in summary["resonances"]),
                key=lambda f: abs(f - f_oracle))
    rel = abs(f_sim - f_oracle) / f_oracle
    cores = os.cpu_count() or 1
    budget = 900.0 * 8.0 / min(cores, 8)
    within_budget = runtime is None or runtime <= budget
    ok = rel <= 0.05 and within_budget
    rt_txt = f"{runtime:.0f}s" if runtime is not None else "cached"
    return CheckResult(
        "oracle_resonance", bool(ok), True,
        f"FDTD {f_sim / 1e9:.4f} GHz vs cavity {f_oracle / 1e9:.4f} GHz "
        f"({rel * 100:.2f}%, limit 5%); runtime {rt_txt} "
        f"(budget {budget:.0f}s on {cores} cores)",
        {"f_sim": f_sim, "f_oracle": f_oracle, "rel": rel, "runtime_s": runtime},
    )


def fixture_config(name: str, preset: str = "standard") -> RunConfig:
    builder = {"simple_u": build_simple_u_patch, "modified_u": build_modified_u_patch}[name]
    from .fixtures import FIXTURE_PARAMS

    return RunConfig(
        design=builder(), design_ref=name, params=FIXTURE_PARAMS[name](),
        preset=preset, f_min=1.0e9, f_max=7.0e9, f_step=5e6, farfield=True,
    )


def _deepest(summary: dict):
    res = summary["resonances"]
    return res[0] if res else None


def check_fixture_comparison(preset: str = "standard", cache_dir=None,
                             out_root=None, log=print) -> tuple[CheckResult, dict]:
    """Criterion 6: the modified design's deepest dip is at least as deep
    and its gain at least as high as the simple design's, at a matched
    preset.  Absolute published numbers are reported, never asserted."""
    import tempfile
    from pathlib import Path

    summaries = {}
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(out_root) if out_root else Path(tmp)
        for name in ("simple_u", "modified_u"):
            cfg = fixture_config(name, preset)
            summaries[name] = cmd_simulate(cfg, root / name, cache_dir=cache_dir,
                                           progress=True, log=log)
    s, m = summaries["simple_u"], summaries["modified_u"]
    ds, dm = _deepest(s), _deepest(m)
    rl_s = ds["rl_db"] if ds else s["min_rl_db"]
    rl_m = dm["rl_db"] if dm else m["min_rl_db"]
    g_s = (ds or {}).get("max_gain_dbi") or s["max_gain_dbi"]
    g_m = (dm or {}).get("max_gain_dbi") or m["max_gain_dbi"]
    rl_ok = rl_m <= rl_s
    gain_ok = (g_m is not None and g_s is not None and g_m >= g_s)
    detail = (f"min RL: modified {rl_m:.2f} dB vs simple {rl_s:.2f} dB "
              f"({'OK' if rl_ok else 'VIOLATED'}); max gain: modified "
              f"{g_m if g_m is not None else float('nan'):.2f} dBi vs simple "
              f"{g_s if g_s is not None else float('nan'):.2f} dBi "
              f"({'OK' if gain_ok else 'VIOLATED'})")
    return CheckResult(
        "fixture_comparison", bool(rl_ok and gain_ok), True, detail,
        {"simple": {"rl_db": rl_s, "gain_dbi": g_s},
         "modified": {"rl_db": rl_m, "gain_dbi": g_m}},
    ), summaries


def reproduction_report(summaries: dict) -> str:
    """Criterion 7: informational table against the published numbers."""
    lines = [
        "Paper reproduction report (informational, not pass/fail)",
        "=" * 74,
        f"{'quantity':34s}{'published':>12s}{'simulated':>14s}{'note':>12s}",
        "-" * 74,
    ]
    oracle = PAPER_VALUES["oracle_fundamental_ghz"]
    for name in ("simple_u", "modified_u"):
        s = summaries.get(name)
        p = PAPER_VALUES[name]
        if s is None:
            lines.append(f"{name:34s}{'':>12s}{'(not run)':>14s}")
            continue
        deepest = _deepest(s)
        f_res = deepest["f_hz"] / 1e9 if deepest else float("nan")
        rl = deepest["rl_db"] if deepest else s["min_rl_db"]
        gain = (deepest or {}).get("max_gain_dbi") or s["max_gain_dbi"]
        all_res = ", ".join(f"{r['f_hz'] / 1e9:.3f}" for r in s["resonances"]) or "none"
        lines.append(f"{name + ' deepest dip (GHz)':34s}{'4.0-4.5':>12s}{f_res:>14.3f}")
        lines.append(f"{name + ' min return loss (dB)':34s}{p['min_rl_db']:>12.1f}{rl:>14.2f}")
        g_txt = f"{gain:.2f}" if gain is not None else "n/a"
        lines.append(f"{name + ' max gain (dBi)':34s}{p['max_gain_dbi']:>12.3f}{g_txt:>14s}")
        lines.append(f"{name + ' all dips <-10 dB (GHz)':34s}{'':>12s}{all_res:>14s}")
    lines += [
        "-" * 74,
        f"cavity-model fundamental of the published base patch: {oracle:.2f} GHz;",
        "the published operating band (4-4.5 GHz) sits well above it, so the",
        "band behavior involves higher modes / the slot-and-feed resonance.",
        "Published dip depths came from an unnamed solver with unpublished",
        "mesh and feed details and are not reproducible as hard targets;",
        "the comparative claims are asserted by check 'fixture_comparison'.",
    ]
    return "\n".join(lines) + "\n"


FAST_CHECKS = (
    check_cavity_roundtrip,
    check_fixture_geometry,
    check_source_spectrum,
    check_touchstone_golden,
    check_config_roundtrip,
    check_energy_conservation,
    check_lossy_decay,
    check_magic_timestep,
    check_slab_convergence,
    check_pml_reflection,
    check_dipole_ntff,
    check_matched_line,
    check_reciprocity,
    check_thread_determinism,
)


def cmd_validate(preset: str = "standard", quick: bool = False, report: bool = False,
                 out_dir=None, cache_dir=None, log=print,
                 pml_thickness: int | None = None) -> tuple[list[CheckResult], str]:
    """Run the validation suite; returns (results, report_text).  The
    pml_thickness hook deliberately weakens the absorber so suites can
    verify the reflection check actually bites."""
    from pathlib import Path

    results = []
    for fn in FAST_CHECKS:
        if fn is check_pml_reflection and pml_thickness is not None:
            results.append(check_pml_reflection(thickness=pml_thickness))
            continue
        t0 = time.perf_counter()
        results.append(fn())
        log(f"[validate] {results[-1].name}: {results[-1].status} "
            f"({time.perf_counter() - t0:.1f}s)")

    summaries = {}
    if not quick:
        results.append(check_oracle_resonance(preset, cache_dir=cache_dir, log=log))
        log(f"[validate] {results[-1].name}: {results[-1].status}")
        cmp_result, summaries = check_fixture_comparison(preset, cache_dir=cache_dir, log=log)
        results.append(cmp_result)
        log(f"[validate] {results[-1].name}: {results[-1].status}")

    table = format_results(results)
    text = table
    if report:
        text += "\n" + reproduction_report(summaries)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validate_report.txt").write_text(text)
        write_json(out / "validate_report.json",
                   {r.name: {"status": r.status, "detail": r.detail, "data": r.data}
                    for r in results})
    return results, text


def format_results(results: list[CheckResult]) -> str:
    lines = [f"{'check':24s}{'status':>8s}  detail", "-" * 78]
    for r in results:
        lines.append(f"{r.name:24s}{r.status:>8s}  {r.detail}")
    n_fail = sum(1 for r in results if r.passed is False)
    lines.append("-" * 78)
    lines.append(f"{len(results)} checks, {n_fail} failed")
    return "\n".join(lines) + "\n"
