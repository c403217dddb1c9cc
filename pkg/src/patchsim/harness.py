"""Simulation orchestration: run, post-process, write outputs, cache.

``cmd_simulate`` drives the full chain (engine, spectra, far field) and
writes deterministic artifacts; everything that affects results is folded
into the config hash, so a cache hit is guaranteed byte-identical to a
fresh run.  Far-field evaluation frequencies are the found resonances, so
it takes a port-only pass first and a surface-recording pass after.

Wall-clock numbers never enter summary.json (they go to timing.json and the
run log) so identical runs produce identical summaries.
"""

from __future__ import annotations

import dataclasses
import json
import math
import shutil
import time
from pathlib import Path

import numpy as np
from filelock import FileLock

from . import spectra
from .config import RunConfig, SweepConfig
from .engine import run as engine_run
from .errors import NoBandwidthError, PatchSimError, PowerAccountingError
from .farfield import gain as ff_gain
from .farfield import ntff, pattern_cut
from .geometry import conductor_mask, write_pgm

MAX_FARFIELD_FREQS = 4


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _pattern_csv(path: Path, pattern) -> None:
    values = pattern.gain_dbi if pattern.gain_dbi is not None else pattern.directivity_dbi()
    with open(path, "w", newline="\n") as fh:
        fh.write("theta_deg,phi_deg,gain_dbi\n")
        for it, th in enumerate(pattern.theta):
            for ip, ph in enumerate(pattern.phi):
                fh.write(f"{math.degrees(th):.1f},{math.degrees(ph):.1f},{values[it, ip]:.4f}\n")


def _cut_csv(path: Path, theta, values) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("theta_deg,gain_dbi\n")
        for th, v in zip(theta, values):
            fh.write(f"{math.degrees(th):.1f},{v:.4f}\n")


def _freq_tag(f: float) -> str:
    return f"{f / 1e9:.4f}GHz"


def cmd_simulate(
    cfg: RunConfig,
    out_dir,
    cache_dir=None,
    progress: bool = False,
    log=print,
) -> dict:
    """Run a configuration end to end; returns the summary dict and leaves
    the requested files in out_dir.  With cache_dir set, a repeated config
    is served from the cache byte-for-byte."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()

    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        entry = cache_dir / chash
        lock = FileLock(str(cache_dir / f"{chash}.lock"))
        with lock:
            if (entry / "done").exists():
                for f in sorted((entry / "files").iterdir()):
                    shutil.copy2(f, out_dir / f.name)
                log(f"[patchsim] cache hit {chash} -> {out_dir}")
                return json.loads((out_dir / "summary.json").read_text())

    t_start = time.perf_counter()
    summary = _simulate_fresh(cfg, out_dir, progress, log)
    elapsed = time.perf_counter() - t_start
    write_json(out_dir / "timing.json",
               {"runtime_s": elapsed, "config_hash": chash})

    if cache_dir is not None:
        entry = cache_dir / chash
        lock = FileLock(str(cache_dir / f"{chash}.lock"))
        with lock:
            if not (entry / "done").exists():
                files_dir = entry / "files"
                files_dir.mkdir(parents=True, exist_ok=True)
                for name in _CACHEABLE:
                    src = out_dir / name
                    if src.exists():
                        shutil.copy2(src, files_dir / name)
                for f in sorted(out_dir.glob("pattern_*.csv")):
                    shutil.copy2(f, files_dir / f.name)
                for f in sorted(out_dir.glob("cut_*.csv")):
                    shutil.copy2(f, files_dir / f.name)
                (entry / "canonical.txt").write_text(cfg.canonical_text())
                (entry / "done").write_text("ok\n")
    return summary


_CACHEABLE = ("s11.s1p", "return_loss.csv", "summary.json", "geometry.pgm")


def _simulate_fresh(cfg: RunConfig, out_dir: Path, progress: bool, log) -> dict:
    design = cfg.design
    freqs = cfg.freqs()
    band = cfg.effective_band

    sim1 = cfg.sim_config()
    if progress:
        sim1 = dataclasses.replace(sim1, progress_every=2000,
                                   log_path=str(out_dir / "run.jsonl"))
    log(f"[patchsim] {cfg.design_ref}: pass 1 (port record), preset={cfg.preset}")
    res1 = engine_run(design, sim1)
    resp = spectra.s11(res1.port, freqs)
    rl = resp.return_loss_db()
    found = spectra.find_resonances(freqs, rl, band=None)

    surface = None
    res2 = None
    if cfg.farfield:
        ff_freqs = tuple(f for f, _ in found[:MAX_FARFIELD_FREQS])
        if not ff_freqs:
            ff_freqs = (0.5 * (band[0] + band[1]),)
        # snap to the spectrum grid so gain lookups are exact
        ff_freqs = tuple(float(freqs[np.argmin(np.abs(freqs - f))]) for f in ff_freqs)
        ff_freqs = tuple(dict.fromkeys(ff_freqs))
        sim2 = dataclasses.replace(sim1, surface_freqs=ff_freqs)
        log(f"[patchsim] {cfg.design_ref}: pass 2 (far field at "
            f"{', '.join(_freq_tag(f) for f in ff_freqs)})")
        res2 = engine_run(design, sim2)
        surface = res2.surface

    # --- assemble summary ---------------------------------------------------
    resonances = []
    patterns = {}
    for f_res, depth in found:
        row = {"f_hz": float(f_res), "rl_db": float(depth)}
        try:
            lo, hi = spectra.bandwidth(freqs, rl, f_res)
            row["bandwidth_10db_hz"] = [lo, hi]
        except NoBandwidthError:
            row["bandwidth_10db_hz"] = None
        row["max_gain_dbi"] = None
        row["gain_direction_deg"] = None
        if surface is not None:
            f_grid = float(freqs[np.argmin(np.abs(freqs - f_res))])
            if any(math.isclose(f_grid, g, rel_tol=1e-12) for g in surface.freqs):
                pattern = ntff(surface, f_grid)
                p_acc = spectra.accepted_power(resp, res1.port, f_grid)
                try:
                    pattern = ff_gain(pattern, p_acc)
                    g, th, ph = pattern.max_gain()
                    row["max_gain_dbi"] = g
                    row["gain_direction_deg"] = [math.degrees(th), math.degrees(ph)]
                    row["accepted_power_w"] = p_acc
                    row["radiated_power_w"] = pattern.radiated_power
                except PowerAccountingError:
                    pass
                patterns[f_grid] = pattern
        resonances.append(row)

    if surface is not None and not patterns:
        f_c = surface.freqs[0]
        pattern = ntff(surface, f_c)
        p_acc = spectra.accepted_power(resp, res1.port, f_c)
        try:
            pattern = ff_gain(pattern, p_acc)
        except PowerAccountingError:
            pass
        patterns[f_c] = pattern

    i_min = int(np.argmin(rl))
    in_band = (freqs >= band[0]) & (freqs <= band[1])
    band_min = float(np.min(rl[in_band])) if np.any(in_band) else None
    gains = [r["max_gain_dbi"] for r in resonances if r["max_gain_dbi"] is not None]

    grid = res1.spec
    summary = {
        "design": cfg.design_ref,
        "preset": cfg.preset,
        "config_hash": cfg.config_hash(),
        "band_hz": [float(band[0]), float(band[1])],
        "frequency_grid_hz": {"min": cfg.f_min, "max": cfg.f_max, "step": cfg.f_step},
        "grid": {
            "dx": grid.dx, "dy": grid.dy, "dz": grid.dz,
            "nx": grid.nx, "ny": grid.ny, "nz": grid.nz,
            "dt": grid.dt, "cells": grid.cell_count,
        },
        "termination": res1.termination,
        "steps": res1.steps,
        "resonances": resonances,
        "min_rl_db": float(rl[i_min]),
        "min_rl_f_hz": float(freqs[i_min]),
        "band_min_rl_db": band_min,
        "max_gain_dbi": (max(gains) if gains else None),
        "farfield_freqs_hz": list(surface.freqs) if surface is not None else [],
    }

    # --- outputs -------------------------------------------------------------
    if "s1p" in cfg.outputs:
        spectra.write_touchstone(out_dir / "s11.s1p", resp)
    if "rl_csv" in cfg.outputs:
        spectra.write_rl_csv(out_dir / "return_loss.csv", freqs, rl)
    if "pattern_csv" in cfg.outputs:
        for f_pat, pattern in sorted(patterns.items()):
            tag = _freq_tag(f_pat)
            _pattern_csv(out_dir / f"pattern_{tag}.csv", pattern)
            for plane in ("e", "h"):
                th, vals = pattern_cut(pattern, plane)
                _cut_csv(out_dir / f"cut_{plane}plane_{tag}.csv", th, vals)
    if "pgm" in cfg.outputs:
        write_pgm(conductor_mask(design.layout, grid.dx), out_dir / "geometry.pgm")
    if "summary_json" in cfg.outputs:
        write_json(out_dir / "summary.json", summary)
    return json.loads(json.dumps(_jsonable(summary)))


def _metric_value(summary: dict, metric: str, band: tuple[float, float]):
    if summary is None:
        return None
    if metric == "min_rl_db":
        return summary["min_rl_db"]
    if metric == "max_gain_dbi":
        return summary["max_gain_dbi"]
    if metric == "f_res":
        res = summary["resonances"]
        return res[0]["f_hz"] if res else None
    raise PatchSimError(f"unknown metric {metric}")


def _best_row(rows: list[dict], metric: str, band: tuple[float, float]) -> int | None:
    candidates = [(i, r["metric_value"]) for i, r in enumerate(rows)
                  if r["status"] == "ok" and r["metric_value"] is not None]
    if not candidates:
        return None
    if metric == "min_rl_db":
        return min(candidates, key=lambda t: t[1])[0]
    if metric == "max_gain_dbi":
        return max(candidates, key=lambda t: t[1])[0]
    f_c = 0.5 * (band[0] + band[1])
    return min(candidates, key=lambda t: abs(t[1] - f_c))[0]


def cmd_sweep(sweep: SweepConfig, out_dir, cache_dir=None, progress=False, log=print) -> dict:
    """One simulation per value (cache-aware); failing rows are recorded and
    the sweep continues.  Raises only if every row fails."""
    from .config import set_param
    from .fixtures import FIXTURE_BUILDERS

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = sweep.base
    band = base.effective_band
    rows = []
    for idx, value in enumerate(sweep.values):
        row_dir = out_dir / f"row_{idx:02d}"
        row = {"index": idx, "value": value, "status": "ok", "error": None,
               "metric_value": None, "f_res_hz": None, "min_rl_db": None,
               "max_gain_dbi": None}
        try:
            params = set_param(base.params, sweep.parameter, value)
            design = FIXTURE_BUILDERS[base.design_ref](params)
            cfg = dataclasses.replace(base, design=design, params=params)
            summary = cmd_simulate(cfg, row_dir, cache_dir=cache_dir,
                                   progress=progress, log=log)
            row["min_rl_db"] = summary["min_rl_db"]
            row["max_gain_dbi"] = summary["max_gain_dbi"]
            res = summary["resonances"]
            row["f_res_hz"] = res[0]["f_hz"] if res else None
            row["metric_value"] = _metric_value(summary, sweep.metric, band)
        except PatchSimError as e:
            row["status"] = "failed"
            row["error"] = f"{type(e).__name__}: {e}"
            log(f"[patchsim] sweep row {idx} ({sweep.parameter}={value}) failed: {e}")
        rows.append(row)

    best = _best_row(rows, sweep.metric, band)
    report = {
        "design": base.design_ref,
        "parameter": sweep.parameter,
        "metric": sweep.metric,
        "values": list(sweep.values),
        "rows": rows,
        "best_index": best,
    }
    write_json(out_dir / "sweep.json", report)
    with open(out_dir / "sweep.csv", "w", newline="\n") as fh:
        fh.write("value,f_res_hz,min_rl_db,max_gain_dbi,metric_value,best,status\n")
        for i, r in enumerate(rows):
            fields = [repr(r["value"])]
            for key in ("f_res_hz", "min_rl_db", "max_gain_dbi", "metric_value"):
                fields.append("" if r[key] is None else f"{r[key]:.6g}")
            fields.append("*" if i == best else "")
            fields.append(r["status"])
            fh.write(",".join(fields) + "\n")
    if all(r["status"] == "failed" for r in rows):
        raise PatchSimError("every sweep row failed")
    return report


def calibration_incident(cfg: RunConfig, log=print):
    """Cross-check mode: measure the incident wave by driving the same port
    into a matched load (a line whose halves both run into the absorber)
    instead of trusting the Thevenin half-voltage construction."""
    import dataclasses as dc

    from .fixtures import microstrip_width_for_z0
    from .geometry import AntennaDesign, PatchLayout, PortSpec, Rect2D

    design = cfg.design
    st = design.stack
    # two z0 branches in parallel match the port when z0 = 2 R_ref
    w = microstrip_width_for_z0(2.0 * design.port.reference_impedance,
                                st.substrate.rel_permittivity, st.substrate_height)
    x0, y0 = design.port.position
    length = 0.06
    half = length / 2 + 40e-3
    cal_layout = PatchLayout((Rect2D(x0 - w / 2, y0 - half, w, 2 * half, "add"),))
    cal_design = AntennaDesign(
        dc.replace(st, board_extent=(w + 20e-3, length)),
        cal_layout,
        PortSpec((x0, y0), design.port.axis, design.port.reference_impedance),
        analysis_band=design.analysis_band,
        substrate_fills_grid=True,
    )
    cal_cfg = dataclasses.replace(cfg, design=cal_design, design_ref="calibration",
                                  farfield=False)
    sim = cal_cfg.sim_config()
    # the calibration strip may be narrower than the run's cells
    dxy = min(sim.dxy, w / 4) if sim.dxy else w / 4
    sim = dc.replace(sim, dxy=dxy, energy_threshold=0.0,
                     max_steps=min(sim.max_steps, 6000))
    log("[patchsim] calibration run (matched line) for the incident wave")
    return engine_run(cal_design, sim).port


def calibration_report(cfg: RunConfig, out_dir, log=print) -> dict:
    """Compare the Thevenin incident construction against the measured
    calibration run; writes calibration.json and returns it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    port = calibration_incident(cfg, log=log)
    n = len(port.v)
    v_inc = port.v_inc[:n]
    v_meas = port.v[:n]
    peak = float(np.max(np.abs(v_inc)))
    rms = float(np.sqrt(np.mean((v_meas - v_inc) ** 2)) / peak)
    peak_ratio = float(np.max(np.abs(v_meas)) / peak)
    report = {
        "incident_convention": "thevenin v_s/2",
        "calibration_peak_over_thevenin_peak": peak_ratio,
        "rms_difference_rel_peak": rms,
        "steps": n,
    }
    write_json(out_dir / "calibration.json", report)
    log(f"[patchsim] calibration: peak ratio {peak_ratio:.4f}, "
        f"rms difference {rms * 100:.2f}% of peak")
    return report
