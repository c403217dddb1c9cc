"""Command-line interface.

Subcommands: simulate, sweep, validate, analyze, synthesize, describe.
Exit codes are stable and documented in the README: 0 success (or all
validation checks passing), 1 failed validation checks, 2 configuration
errors, 3 geometry/port errors, 4 grid budget, 5 solver divergence,
6 spectral/power post-processing errors, 70 unexpected internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .cavity import PatchModel, design_patch, effective_permittivity, length_extension, resonant_frequency
from .config import (
    PRESETS,
    RunConfig,
    SweepConfig,
    build_fixture,
    parse_config_file,
)
from .errors import (
    BandCoverageError,
    BudgetError,
    ConfigError,
    CoverageError,
    DivergenceError,
    GeometryError,
    MissingFrequencyError,
    NoBandwidthError,
    PatchSimError,
    PortPlacementError,
    PowerAccountingError,
    TruncationError,
)
from .fixtures import FIXTURE_BUILDERS
from .geometry import conductor_mask, layout_area

EXIT_CODES = (
    (ConfigError, 2),
    (PortPlacementError, 3),
    (GeometryError, 3),
    (CoverageError, 3),
    (BudgetError, 4),
    (DivergenceError, 5),
    (BandCoverageError, 6),
    (TruncationError, 6),
    (NoBandwidthError, 6),
    (MissingFrequencyError, 6),
    (PowerAccountingError, 6),
    (PatchSimError, 70),
)


def _exit_code(err: PatchSimError) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(err, cls):
            return code
    return 70


def _parse_band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as e:
        raise ConfigError(f"--band expects LO:HI in Hz, got {text!r}") from e
    return lo, hi


def _load_run_config(args) -> RunConfig:
    import dataclasses

    if args.config:
        cfg = parse_config_file(args.config)
        if isinstance(cfg, SweepConfig):
            raise ConfigError("this is a sweep config; use the 'sweep' subcommand")
    elif args.fixture:
        design, params = build_fixture(args.fixture)
        cfg = RunConfig(design=design, design_ref=args.fixture, params=params)
    else:
        raise ConfigError("give either --config FILE or --fixture NAME")
    updates = {}
    if args.preset:
        updates["preset"] = args.preset
    if args.band:
        updates["band"] = _parse_band(args.band)
    if args.threads:
        updates["threads"] = args.threads
    if getattr(args, "no_farfield", False):
        updates["farfield"] = False
    return dataclasses.replace(cfg, **updates) if updates else cfg


def cmd_simulate_cli(args) -> int:
    from .harness import calibration_report, cmd_simulate

    cfg = _load_run_config(args)
    log = lambda *a: print(*a, file=sys.stderr)  # noqa: E731
    summary = cmd_simulate(cfg, args.out_dir, cache_dir=args.cache_dir,
                           progress=not args.quiet, log=log)
    if args.calibrate_incident:
        calibration_report(cfg, args.out_dir, log=log)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_sweep_cli(args) -> int:
    from .harness import cmd_sweep

    cfg = parse_config_file(args.config)
    if not isinstance(cfg, SweepConfig):
        raise ConfigError("config has no [sweep] section")
    import dataclasses

    if args.preset:
        cfg = dataclasses.replace(cfg, base=dataclasses.replace(cfg.base, preset=args.preset))
    if args.threads:
        cfg = dataclasses.replace(cfg, base=dataclasses.replace(cfg.base, threads=args.threads))
    report = cmd_sweep(cfg, args.out_dir, cache_dir=args.cache_dir,
                       progress=not args.quiet,
                       log=lambda *a: print(*a, file=sys.stderr))
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_validate_cli(args) -> int:
    from .validation import cmd_validate

    results, text = cmd_validate(
        preset=args.preset or "standard",
        quick=args.quick,
        report=args.report,
        out_dir=args.out_dir,
        cache_dir=args.cache_dir,
        log=lambda *a: print(*a, file=sys.stderr),
    )
    print(text, end="")
    return 0 if all(r.passed is not False for r in results if r.hard) else 1


def cmd_analyze_cli(args) -> int:
    model = PatchModel(args.width, args.length, args.height, args.eps_r)
    eps_eff = effective_permittivity(model)
    out = {
        "width_m": args.width,
        "length_m": args.length,
        "substrate_height_m": args.height,
        "rel_permittivity": args.eps_r,
        "effective_permittivity": eps_eff,
        "length_extension_m": length_extension(model, eps_eff),
        "resonant_frequency_hz": resonant_frequency(model),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_synthesize_cli(args) -> int:
    w, l = design_patch(args.frequency, args.eps_r, args.height)
    model = PatchModel(w, l, args.height, args.eps_r)
    out = {
        "target_frequency_hz": args.frequency,
        "rel_permittivity": args.eps_r,
        "substrate_height_m": args.height,
        "width_m": w,
        "length_m": l,
        "check_resonant_frequency_hz": resonant_frequency(model),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_describe_cli(args) -> int:
    if args.fixture not in FIXTURE_BUILDERS:
        raise ConfigError(
            f"unknown fixture {args.fixture!r}; available: {sorted(FIXTURE_BUILDERS)}"
        )
    design, params = build_fixture(args.fixture)
    bbox = design.layout.bounding_box()
    out = {
        "fixture": args.fixture,
        "parameters": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in _params_dict(params).items()},
        "layout_area_m2": layout_area(design.layout),
        "layout_bbox_m": list(bbox) if bbox else None,
        "board_rect_m": list(design.board_rect()),
        "rect_count": len(design.layout.rects),
        "min_feature_m": design.layout.min_feature(),
        "analysis_band_hz": list(design.analysis_band),
        "port": {"position_m": list(design.port.position), "axis": design.port.axis,
                 "reference_impedance_ohm": design.port.reference_impedance},
        "presets": {name: {"dxy_m": p.dxy, "min_feature_cells": p.min_feature_cells,
                           "dtype": p.dtype}
                    for name, p in PRESETS.items()},
    }
    if args.pgm:
        write_res = 0.25e-3
        from .geometry import write_pgm

        write_pgm(conductor_mask(design.layout, write_res), args.pgm)
        out["pgm"] = str(args.pgm)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _params_dict(params) -> dict:
    import dataclasses

    out = {}
    for f in dataclasses.fields(params):
        v = getattr(params, f.name)
        if dataclasses.is_dataclass(v):
            out.update({f"{f.name}.{k}": vv for k, vv in _params_dict(v).items()})
        else:
            out[f.name] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="patchsim",
        description="FDTD simulator and analysis toolchain for microstrip patch antennas",
    )
    p.add_argument("--version", action="version", version=f"patchsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, config=True):
        if config:
            sp.add_argument("--config", help="TOML configuration file")
        sp.add_argument("--preset", choices=[*PRESETS, "explicit"],
                        help="grid preset (coarse | standard | fine)")
        sp.add_argument("--out-dir", default="out", help="output directory")
        sp.add_argument("--threads", type=int, help="solver thread count")
        sp.add_argument("--cache-dir", help="result cache keyed by config hash")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")

    sp = sub.add_parser("simulate", help="run a design end to end")
    add_common(sp)
    sp.add_argument("--fixture", help=f"fixture name: {', '.join(sorted(FIXTURE_BUILDERS))}")
    sp.add_argument("--band", help="analysis band LO:HI in Hz (e.g. 4e9:4.5e9)")
    sp.add_argument("--no-farfield", action="store_true", help="skip the far-field pass")
    sp.add_argument("--calibrate-incident", action="store_true",
                    help="cross-check the Thevenin incident wave against a "
                         "matched-line calibration run")
    sp.set_defaults(fn=cmd_simulate_cli)

    sp = sub.add_parser("sweep", help="run a parameter sweep (metric: min_rl_db -> "
                                      "deepest dip wins; max_gain_dbi -> largest; "
                                      "f_res -> closest to band center)")
    add_common(sp)
    sp.set_defaults(fn=cmd_sweep_cli)

    sp = sub.add_parser("validate", help="run the oracle/property validation suite")
    add_common(sp, config=False)
    sp.add_argument("--quick", action="store_true", help="fast checks only")
    sp.add_argument("--report", action="store_true",
                    help="append the paper reproduction report")
    sp.set_defaults(fn=cmd_validate_cli)

    sp = sub.add_parser("analyze", help="cavity-model analysis of a rectangular patch")
    sp.add_argument("--width", type=float, required=True, help="patch width (m)")
    sp.add_argument("--length", type=float, required=True, help="patch length (m)")
    sp.add_argument("--height", type=float, required=True, help="substrate height (m)")
    sp.add_argument("--eps-r", type=float, required=True, help="relative permittivity")
    sp.set_defaults(fn=cmd_analyze_cli)

    sp = sub.add_parser("synthesize", help="cavity-model synthesis for a target frequency")
    sp.add_argument("--frequency", type=float, required=True, help="target frequency (Hz)")
    sp.add_argument("--height", type=float, required=True, help="substrate height (m)")
    sp.add_argument("--eps-r", type=float, required=True, help="relative permittivity")
    sp.set_defaults(fn=cmd_synthesize_cli)

    sp = sub.add_parser("describe", help="print fixture parameters and derived stats")
    sp.add_argument("fixture")
    sp.add_argument("--pgm", help="also write a conductor bitmap to this path")
    sp.set_defaults(fn=cmd_describe_cli)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PatchSimError as e:
        print(f"patchsim: error: {e}", file=sys.stderr)
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
