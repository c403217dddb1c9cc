"""Structured run configuration: TOML in, validated objects out.

All lengths are meters and all frequencies hertz; unknown keys anywhere are
hard errors so a typo cannot silently change the geometry.  Designs can be
given as a fixture reference (``design = "simple_u"``, optionally with a
``[params]`` override table) or inline via ``[stack]``, ``[[layout]]`` and
``[port]`` sections.  ``serialize_design``/``canonical_text`` emit a stable
text form used both for the round-trip guarantee and as the cache key.
"""

from __future__ import annotations

import dataclasses
import hashlib
import re
import sys
from dataclasses import dataclass, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__ as _pkg_version
from .engine import SimConfig
from .errors import ConfigError, GeometryError
from .fixtures import FIXTURE_BUILDERS, FIXTURE_PARAMS
from .geometry import (
    AntennaDesign,
    Material,
    PatchLayout,
    PortSpec,
    Rect2D,
    SubstrateStack,
)


@dataclass(frozen=True)
class Preset:
    """Documented fidelity/runtime tradeoffs.  dxy comes from the fixture
    family's 0.5 mm smallest feature divided by min_feature_cells; both
    paper fixtures therefore run on matched grids at a given preset."""

    name: str
    dxy: float
    min_feature_cells: int
    cells_per_wavelength: int = 20
    courant: float = 0.99
    dtype: str = "float32"
    max_steps: int = 120_000


PRESETS = {
    "coarse": Preset("coarse", 0.5e-3, 1, max_steps=80_000),
    "standard": Preset("standard", 0.25e-3, 2),
    "fine": Preset("fine", 0.125e-3, 4, max_steps=240_000),
}

DEFAULT_OUTPUTS = ("s1p", "rl_csv", "pattern_csv", "summary_json")
SWEEP_METRICS = ("min_theory", "min_rl_db", "max_gain_dbi", "f_res")


@dataclass(frozen=True)
class RunConfig:
    """Everything cmd_simulate needs; derived from a TOML file or built in
    code.  Determinism is unconditional: there is no randomness to seed."""

    design: AntennaDesign
    design_ref: str = "inline"
    params: object | None = None
    preset: str = "coarse"
    band: tuple[float, float] | None = None
    f_min: float = 1.0e9
    f_max: float = 7.0e9
    f_step: float = 5.0e6
    outputs: tuple[str, ...] = DEFAULT_OUTPUTS
    farfield: bool = True
    threads: int | None = None
    dxy: float | None = None
    dtype: str | None = None
    max_steps: int | None = None
    cell_budget: int | None = None

    def __post_init__(self):
        if self.preset not in PRESETS and self.preset != "explicit":
            raise ConfigError(f"unknown preset {self.preset!r}; "
                              f"choose from {sorted(PRESETS)} or 'explicit'")
        if self.preset == "explicit" and self.dxy is None:
            raise ConfigError("preset 'explicit' requires simulation.dxy")
        for out in self.outputs:
            if out not in ("s1p", "rl_csv", "pattern_csv", "summary_json", "pgm"):
                raise ConfigError(f"unknown output kind {out!r}")
        if not (0 < self.f_min < self.f_max and self.f_step > 0):
            raise ConfigError("need 0 < f_min < f_max and f_step > 0")

    @property
    def effective_band(self) -> tuple[float, float]:
        return self.band if self.band is not None else self.design.analysis_band

    def freqs(self) -> np.ndarray:
        n = int(round((self.f_max - self.f_min) / self.f_step))
        return self.f_min + self.f_step * np.arange(n + 1)

    def sim_config(self, surface_freqs: tuple[float, ...] = ()) -> SimConfig:
        p = PRESETS.get(self.preset)
        dxy = self.dxy if self.dxy is not None else (p.dxy if p else None)
        dtype = self.dtype or (p.dtype if p else "float32")
        max_steps = self.max_steps or (p.max_steps if p else 120_000)
        kwargs = dict(
            dxy=dxy,
            dtype=dtype,
            max_steps=max_steps,
            surface_freqs=surface_freqs,
            threads=self.threads,
            f_max=max(self.f_max, 7.0e9),
        )
        if p is not None:
            kwargs["min_feature_cells"] = p.min_feature_cells
            kwargs["cells_per_wavelength"] = p.cells_per_wavelength
            kwargs["courant"] = p.courant
        if self.cell_budget is not None:
            kwargs["cell_budget"] = self.cell_budget
        return SimConfig(**kwargs)

    def canonical_text(self) -> str:
        """Stable text capturing everything that affects simulation output
        (threads excluded: results are bit-identical across thread counts)."""
        sim = self.sim_config()
        wf = sim.waveform
        lines = [
            f"patchsim-config {_pkg_version}",
            serialize_design(self.design).strip(),
            f"preset = {self.preset!r}",
            f"dxy = {sim.dxy!r}",
            f"dtype = {sim.dtype!r}",
            f"max_steps = {sim.max_steps!r}",
            f"cells_per_wavelength = {sim.cells_per_wavelength!r}",
            f"min_feature_cells = {sim.min_feature_cells!r}",
            f"courant = {sim.courant!r}",
            f"cell_budget = {sim.cell_budget!r}",
            f"f_grid = ({self.f_min!r}, {self.f_max!r}, {self.f_step!r})",
            f"band = {tuple(self.effective_band)!r}",
            f"waveform = ({wf.f0!r}, {wf.bandwidth!r}, {wf.t0!r}, {wf.amplitude!r})",
            f"farfield = {self.farfield!r}",
            f"energy_threshold = {sim.energy_threshold!r}",
            f"npml = {sim.npml!r}",
            f"cpml = ({sim.cpml.thickness!r}, {sim.cpml.polynomial_order!r}, "
            f"{sim.cpml.sigma_max_ratio!r}, {sim.cpml.kappa_max!r}, {sim.cpml.alpha_max!r})",
        ]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    parameter: str
    values: tuple
    metric: str = "min_rl_db"

    def __post_init__(self):
        if len(self.values) < 2:
            raise ConfigError("sweep needs at least 2 values")
        if self.metric not in ("min_rl_db", "max_gain_dbi", "f_res"):
            raise ConfigError(f"unknown sweep metric {self.metric!r}")
        if self.base.design_ref == "inline":
            raise ConfigError("sweeps address fixture parameters; set design to a fixture name")
        # fail fast on unresolvable parameter paths
        set_param(self.base.params, self.parameter, self.values[0])


# ------------------------------------------------------------ strict walking

def _check_keys(table: dict, allowed: dict, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}; allowed: {sorted(allowed)}")


def _get(table: dict, key: str, kind, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key {path}{key}")
        return default
    val = table[key]
    if kind is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, kind):
        raise ConfigError(
            f"{path}{key} must be {getattr(kind, '__name__', kind)}, got {type(val).__name__}"
        )
    return val


_STACK_KEYS = {"rel_permittivity", "loss_tangent", "substrate_height",
               "ground_thickness", "board_extent", "board_margin"}
_RECT_KEYS = {"op", "x0", "y0", "width", "height"}
_PORT_KEYS = {"x", "y", "axis", "reference_impedance"}
_BAND_KEYS = {"f_lo", "f_hi"}
_SIM_KEYS = {"preset", "dxy", "dtype", "max_steps", "cell_budget", "threads",
             "f_min", "f_max", "f_step", "outputs", "farfield", "deterministic"}
_SWEEP_KEYS = {"parameter", "values", "metric"}
_TOP_KEYS = {"design", "params", "stack", "layout", "port", "band", "simulation", "sweep"}


def _parse_stack(table: dict, path: str, layout: PatchLayout) -> SubstrateStack:
    _check_keys(table, {k: None for k in _STACK_KEYS}, path)
    er = _get(table, "rel_permittivity", float, path, required=True)
    tand = _get(table, "loss_tangent", float, path, 0.0)
    h = _get(table, "substrate_height", float, path, required=True)
    if h <= 0:
        raise ConfigError(f"{path}substrate_height must be > 0, got {h}")
    gt = _get(table, "ground_thickness", float, path, 0.1e-3)
    if "board_extent" in table and "board_margin" in table:
        raise ConfigError(f"{path}board_extent and {path}board_margin are exclusive")
    if "board_extent" in table:
        ext = table["board_extent"]
        if not (isinstance(ext, list) and len(ext) == 2):
            raise ConfigError(f"{path}board_extent must be [width, depth]")
        extent = (float(ext[0]), float(ext[1]))
    else:
        margin = _get(table, "board_margin", float, path, 20.0e-3)
        bbox = layout.bounding_box()
        if bbox is None:
            raise ConfigError("cannot size a board around an empty layout")
        extent = (bbox[2] - bbox[0] + 2 * margin, bbox[3] - bbox[1] + 2 * margin)
    try:
        return SubstrateStack(Material("substrate", er, tand), h, gt, extent)
    except GeometryError as e:
        raise ConfigError(f"{path}: {e}") from e


def _parse_layout(items, path: str) -> PatchLayout:
    rects = []
    for idx, table in enumerate(items):
        p = f"{path}[{idx}]."
        _check_keys(table, {k: None for k in _RECT_KEYS}, p)
        try:
            rects.append(Rect2D(
                _get(table, "x0", float, p, required=True),
                _get(table, "y0", float, p, required=True),
                _get(table, "width", float, p, required=True),
                _get(table, "height", float, p, required=True),
                _get(table, "op", str, p, "add"),
            ))
        except GeometryError as e:
            raise ConfigError(f"{p}: {e}") from e
    return PatchLayout(tuple(rects))


def _parse_port(table: dict, path: str) -> PortSpec:
    _check_keys(table, {k: None for k in _PORT_KEYS}, path)
    try:
        return PortSpec(
            (_get(table, "x", float, path, required=True),
             _get(table, "y", float, path, required=True)),
            _get(table, "axis", str, path, "+y"),
            _get(table, "reference_impedance", float, path, 50.0),
        )
    except GeometryError as e:
        raise ConfigError(f"{path}: {e}") from e


# ----------------------------------------------------- fixture parameter paths

_SEGMENT = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\[(\d+)\])?$")


def _split_path(path: str) -> list[tuple[str, int | None]]:
    segments = []
    for raw in path.split("."):
        m = _SEGMENT.match(raw)
        if not m:
            raise ConfigError(f"bad parameter path segment {raw!r} in {path!r}")
        segments.append((m.group(1), int(m.group(2)) if m.group(2) else None))
    return segments


def _normalize_segments(segments):
    """Aliases: a leading 'stack.' is decorative; 'stub[k].width' means
    stub_widths[k]."""
    out = []
    i = 0
    while i < len(segments):
        name, idx = segments[i]
        if name == "stack" and idx is None and i + 1 < len(segments):
            i += 1
            continue
        if name == "stub" and idx is not None and i + 1 < len(segments) \
                and segments[i + 1] == ("width", None):
            out.append(("stub_widths", idx))
            i += 2
            continue
        out.append((name, idx))
        i += 1
    return out


def _resolve_holder(params, name: str):
    """(holder, attr) where holder is the dataclass owning attr; descends
    into a .base sub-dataclass when the attribute lives there."""
    obj = params
    while True:
        if hasattr(obj, name):
            return obj, name
        if hasattr(obj, "base"):
            obj = obj.base
            continue
        raise ConfigError(f"parameter {name!r} not found on {type(params).__name__}")


def _rebuild(params, holder, new_holder):
    if params is holder:
        return new_holder
    return dataclasses.replace(params, base=_rebuild(params.base, holder, new_holder))


def get_param(params, path: str):
    segments = _normalize_segments(_split_path(path))
    val = params
    for name, idx in segments:
        holder, attr = _resolve_holder(val, name)
        val = getattr(holder, attr)
        if idx is not None:
            try:
                val = val[idx]
            except (TypeError, IndexError) as e:
                raise ConfigError(f"cannot index {name!r} with [{idx}] in {path!r}") from e
    return val


def set_param(params, path: str, value):
    """Return a copy of the fixture params with one (possibly nested,
    possibly indexed) field replaced."""
    segments = _normalize_segments(_split_path(path))
    if len(segments) != 1:
        raise ConfigError(f"only single-field parameter paths are supported, got {path!r}")
    name, idx = segments[0]
    holder, attr = _resolve_holder(params, name)
    current = getattr(holder, attr)
    if idx is not None:
        try:
            current[idx]
        except (TypeError, IndexError) as e:
            raise ConfigError(f"cannot index {name!r} with [{idx}] in {path!r}") from e
        seq = list(current)
        seq[idx] = value
        value = tuple(seq)
    try:
        new_holder = dataclasses.replace(holder, **{attr: value})
    except TypeError as e:
        raise ConfigError(f"cannot set parameter {path!r}: {e}") from e
    return _rebuild(params, holder, new_holder)


def build_fixture(name: str, overrides: dict | None = None):
    """(design, params) for a registered fixture with parameter overrides."""
    if name not in FIXTURE_BUILDERS:
        raise ConfigError(f"unknown fixture {name!r}; available: {sorted(FIXTURE_BUILDERS)}")
    params = FIXTURE_PARAMS[name]()
    for key, val in (overrides or {}).items():
        if isinstance(val, list):
            val = tuple(float(v) for v in val)
        elif isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        params = set_param(params, key, val)
    try:
        design = FIXTURE_BUILDERS[name](params)
    except GeometryError as e:
        raise ConfigError(f"fixture {name!r} with overrides is inconsistent: {e}") from e
    return design, params


# ---------------------------------------------------------------- main entry

def parse_config(text: str) -> RunConfig | SweepConfig:
    """Parse and validate a TOML run or sweep configuration."""
    if not text.strip():
        raise ConfigError("empty config")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML parse error: {e}") from e
    _check_keys(data, {k: None for k in _TOP_KEYS}, "")

    params = None
    if "design" in data:
        name = _get(data, "design", str, "")
        for section in ("stack", "layout", "port"):
            if section in data:
                raise ConfigError(f"design = {name!r} and [{section}] are exclusive")
        overrides = data.get("params")
        if overrides is not None and not isinstance(overrides, dict):
            raise ConfigError("[params] must be a table")
        design, params = build_fixture(name, overrides)
        design_ref = name
    else:
        for section in ("stack", "layout", "port"):
            if section not in data:
                raise ConfigError(f"inline design needs a [{section}] section "
                                  "(or set design = \"<fixture>\")")
        if "params" in data:
            raise ConfigError("[params] only applies to fixture references")
        layout = _parse_layout(data["layout"], "layout")
        stack = _parse_stack(data["stack"], "stack.", layout)
        port = _parse_port(data["port"], "port.")
        band = (4.0e9, 4.5e9)
        if "band" in data:
            _check_keys(data["band"], {k: None for k in _BAND_KEYS}, "band.")
            band = (_get(data["band"], "f_lo", float, "band.", required=True),
                    _get(data["band"], "f_hi", float, "band.", required=True))
        try:
            design = AntennaDesign(stack, layout, port, analysis_band=band)
        except GeometryError as e:
            raise ConfigError(str(e)) from e
        design_ref = "inline"

    band_override = None
    if "band" in data and design_ref != "inline":
        _check_keys(data["band"], {k: None for k in _BAND_KEYS}, "band.")
        band_override = (_get(data["band"], "f_lo", float, "band.", required=True),
                         _get(data["band"], "f_hi", float, "band.", required=True))

    sim = data.get("simulation", {})
    _check_keys(sim, {k: None for k in _SIM_KEYS}, "simulation.")
    if "deterministic" in sim and sim["deterministic"] is not True:
        raise ConfigError("simulation.deterministic cannot be disabled; "
                          "there is no randomness to seed")
    outputs = sim.get("outputs")
    if outputs is not None:
        if not isinstance(outputs, list):
            raise ConfigError("simulation.outputs must be a list")
        outputs = tuple(outputs)

    run_cfg = RunConfig(
        design=design,
        design_ref=design_ref,
        params=params,
        preset=_get(sim, "preset", str, "simulation.", "coarse"),
        band=band_override,
        f_min=_get(sim, "f_min", float, "simulation.", 1.0e9),
        f_max=_get(sim, "f_max", float, "simulation.", 7.0e9),
        f_step=_get(sim, "f_step", float, "simulation.", 5.0e6),
        outputs=outputs or DEFAULT_OUTPUTS,
        farfield=_get(sim, "farfield", bool, "simulation.", True),
        threads=_get(sim, "threads", int, "simulation."),
        dxy=_get(sim, "dxy", float, "simulation."),
        dtype=_get(sim, "dtype", str, "simulation."),
        max_steps=_get(sim, "max_steps", int, "simulation."),
        cell_budget=_get(sim, "cell_budget", int, "simulation."),
    )

    if "sweep" in data:
        sw = data["sweep"]
        _check_keys(sw, {k: None for k in _SWEEP_KEYS}, "sweep.")
        values = sw.get("values")
        if not isinstance(values, list):
            raise ConfigError("sweep.values must be a list")
        return SweepConfig(
            base=run_cfg,
            parameter=_get(sw, "parameter", str, "sweep.", required=True),
            values=tuple(float(v) for v in values),
            metric=_get(sw, "metric", str, "sweep.", "min_rl_db"),
        )
    return run_cfg


def parse_config_file(path) -> RunConfig | SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --------------------------------------------------------------- serialization

def serialize_design(design: AntennaDesign) -> str:
    """Deterministic inline-TOML form; parse(serialize(d)) reproduces d
    exactly (floats via repr)."""
    lines = ["[stack]"]
    st = design.stack
    lines.append(f"rel_permittivity = {st.substrate.rel_permittivity!r}")
    lines.append(f"loss_tangent = {st.substrate.loss_tangent!r}")
    lines.append(f"substrate_height = {st.substrate_height!r}")
    lines.append(f"ground_thickness = {st.ground_thickness!r}")
    lines.append(f"board_extent = [{st.board_extent[0]!r}, {st.board_extent[1]!r}]")
    for r in design.layout.rects:
        lines += ["", "[[layout]]",
                  f"op = {r.op!r}".replace("'", '"'),
                  f"x0 = {r.x0!r}",
                  f"y0 = {r.y0!r}",
                  f"width = {r.width!r}",
                  f"height = {r.height!r}"]
    lines += ["", "[port]",
              f"x = {design.port.position[0]!r}",
              f"y = {design.port.position[1]!r}",
              f'axis = "{design.port.axis}"',
              f"reference_impedance = {design.port.reference_impedance!r}"]
    lines += ["", "[band]",
              f"f_lo = {float(design.analysis_band[0])!r}",
              f"f_hi = {float(design.analysis_band[1])!r}"]
    return "\n".join(lines) + "\n"
