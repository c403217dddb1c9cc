"""Time stepping: leapfrog cycle with CPML, lumped port and energy probes.

One step is H-then-E: all H components advance half a step from curl E,
then all E components advance a full step from curl H (with the CPML
convolution terms), the Thevenin port source injects, and symmetry-plane
copies run last.  PEC sheets stay pinned because their update coefficients
are zero.  Port records are stamped at E times n*dt; the current sample
rides half a step earlier (H time), which only matters if you build an
impedance from both.
"""

from __future__ import annotations

import json
import math
import sys
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import MU0
from .cpml import CpmlParams, CpmlState, build_cpml
from .errors import DivergenceError, PortPlacementError
from .geometry import AntennaDesign
from .grid import (
    FieldState,
    GridLimits,
    GridSpec,
    MaterialGrid,
    assign_materials,
    auto_grid,
)
from .source import SourceWaveform

BOUNDARY_KINDS = ("cpml", "pec", "mirror")


@dataclass
class LumpedPort:
    """Thevenin source (series R) across the substrate gap at one (i, j)."""

    i: int
    j: int
    k0: int
    k1: int
    resistance: float
    axis: str
    src_coef: np.ndarray  # per-cell Ez increment per volt of source

    @property
    def n_cells(self) -> int:
        return self.k1 - self.k0


def make_lumped_port(design: AntennaDesign, spec: GridSpec, mats: MaterialGrid) -> LumpedPort:
    """Carve the port into the material coefficients and return its handle.

    The source and its resistance are distributed over the vertical Ez
    stack between ground and conductor sheet; the semi-implicit update
    folds the per-cell conductance into Ca/Cb.
    """
    x, y = design.port.position
    i = spec.node_index("x", x)
    j = spec.node_index("y", y)
    k0, k1 = mats.ground_plane_k, mats.patch_plane_k
    nx, ny = spec.nx, spec.ny
    if not (0 < i < nx and 0 < j < ny):
        raise PortPlacementError(f"port node ({i}, {j}) outside the grid interior")
    over_gnd = bool(mats.pec_ex[min(i, nx - 1), j, k0] or mats.pec_ey[i, min(j, ny - 1), k0])
    under_conductor = bool(
        mats.pec_ex[min(i, nx - 1), j, k1] or mats.pec_ey[i, min(j, ny - 1), k1]
    )
    if not over_gnd:
        raise PortPlacementError(
            f"port at ({x:.4g}, {y:.4g}) is not over the ground plane"
        )
    if not under_conductor:
        raise PortPlacementError(
            f"port at ({x:.4g}, {y:.4g}) does not touch a conductor sheet"
        )

    n = k1 - k0
    r = design.port.reference_impedance
    dt, dx, dy, dz = spec.dt, spec.dx, spec.dy, spec.dz
    ca = mats.ca_ez[i, j, k0:k1].astype(np.float64)
    cb = mats.cb_ez[i, j, k0:k1].astype(np.float64)
    if np.any(cb <= 0.0):
        raise PortPlacementError("port column crosses a PEC-pinned edge")
    eps = dt * (1.0 + ca) / (2.0 * cb)
    sig_term = (1.0 - ca) / (1.0 + ca)  # sigma dt / (2 eps)
    beta = dt * dz * n / (2.0 * r * eps * dx * dy)
    denom = 1.0 + sig_term + beta
    ca_new = (1.0 - sig_term - beta) / denom
    cb_new = (dt / eps) / denom
    src = -(dt / (eps * r * dx * dy)) / denom
    dtype = mats.ca_ez.dtype
    mats.ca_ez[i, j, k0:k1] = ca_new.astype(dtype)
    mats.cb_ez[i, j, k0:k1] = cb_new.astype(dtype)
    return LumpedPort(i, j, k0, k1, r, design.port.axis, src.astype(dtype))


@dataclass
class PortRecord:
    """Port samples: v(t) and v_inc(t) at E times, i(t) at H times (dt/2
    earlier); equal lengths, spacing dt."""

    dt: float
    v: np.ndarray
    i: np.ndarray
    v_inc: np.ndarray
    reference_impedance: float = 50.0
    decayed: bool = True

    @property
    def times(self) -> np.ndarray:
        return self.dt * (1.0 + np.arange(len(self.v)))

    def __len__(self) -> int:
        return len(self.v)


@dataclass
class RunResult:
    port: PortRecord | None
    surface: object | None
    termination: str
    steps: int
    peak_energy: float
    energy_trace: list
    spec: GridSpec
    diverged_step: int | None = None


class Stepper:
    """Owns the field state and advances it; one instance per run."""

    def __init__(
        self,
        spec: GridSpec,
        mats: MaterialGrid,
        *,
        cpml_params: CpmlParams | None = None,
        boundaries: tuple[str, str, str] = ("cpml", "cpml", "cpml"),
        dtype=np.float64,
        port: LumpedPort | None = None,
        waveform: SourceWaveform | None = None,
        recorder=None,
    ):
        for b in boundaries:
            if b not in BOUNDARY_KINDS:
                raise ValueError(f"unknown boundary kind {b!r}")
        self.spec = spec
        self.mats = mats
        self.boundaries = boundaries
        self.dtype = np.dtype(dtype)
        self.port = port
        self.waveform = waveform
        self.recorder = recorder
        self.fields = FieldState.zeros(spec, self.dtype)

        active = tuple(b == "cpml" for b in boundaries)
        params = cpml_params or CpmlParams()
        if any(active):
            self.cpml = build_cpml(spec, params, active, dtype=self.dtype)
        else:
            self.cpml = CpmlState(params, None, None, None)

        sc = self.dtype.type
        n = (spec.nx, spec.ny, spec.nz)
        self._ik_e = {}
        self._ik_h = {}
        for name, size in zip("xyz", n):
            ax = self.cpml.axis(name)
            if ax is None:
                self._ik_e[name] = np.ones(size + 1, dtype=self.dtype)
                self._ik_h[name] = np.ones(size, dtype=self.dtype)
            else:
                self._ik_e[name] = ax.inv_kappa_e
                self._ik_h[name] = ax.inv_kappa_h
        self._dt_mu = sc(spec.dt / MU0)
        self._inv = {name: sc(1.0 / d) for name, d in zip("xyz", (spec.dx, spec.dy, spec.dz))}
        self._h_prev = tuple(np.zeros_like(a) for a in self.fields.h_arrays())
        self._dv = spec.dx * spec.dy * spec.dz

    # -- one leapfrog cycle ------------------------------------------------
    def step(self, probe_energy: bool = False) -> float | None:
        f = self.fields
        m = self.mats
        sp = self.spec
        inv = self._inv
        ike, ikh = self._ik_e, self._ik_h

        if probe_energy:
            for buf, h in zip(self._h_prev, f.h_arrays()):
                np.copyto(buf, h)

        kernels.update_hx(f.hx, f.ey, f.ez, self._dt_mu, inv["y"], inv["z"], ikh["y"], ikh["z"])
        kernels.update_hy(f.hy, f.ez, f.ex, self._dt_mu, inv["z"], inv["x"], ikh["z"], ikh["x"])
        kernels.update_hz(f.hz, f.ex, f.ey, self._dt_mu, inv["x"], inv["y"], ikh["x"], ikh["y"])
        self._apply_cpml_h()

        energy = None
        if probe_energy:
            f.h_prev = self._h_prev
            energy = total_energy(f, m)

        t_h = (f.step + 0.5) * sp.dt
        if self.recorder is not None:
            self.recorder.accumulate_h(f, t_h)

        kernels.update_ex(f.ex, f.hy, f.hz, m.ca_ex, m.cb_ex, inv["y"], inv["z"], ike["y"], ike["z"])
        kernels.update_ey(f.ey, f.hz, f.hx, m.ca_ey, m.cb_ey, inv["z"], inv["x"], ike["z"], ike["x"])
        kernels.update_ez(f.ez, f.hx, f.hy, m.ca_ez, m.cb_ez, inv["x"], inv["y"], ike["x"], ike["y"])
        self._apply_cpml_e()

        if self.port is not None and self.waveform is not None:
            p = self.port
            vs = self.waveform(t_h)
            if vs != 0.0:
                f.ez[p.i, p.j, p.k0:p.k1] += p.src_coef * self.dtype.type(vs)

        self._apply_mirrors()

        f.step += 1
        f.time = f.step * sp.dt
        if self.recorder is not None:
            self.recorder.accumulate_e(f, f.time)
        return energy

    def _apply_cpml_h(self):
        f, st = self.fields, self.cpml
        t = st.params.thickness
        inv = self._inv
        dt_mu = self._dt_mu
        if st.x is not None:
            kernels.cpml_hy_x(f.hy, f.ez, st.psi[("hy", "x")], st.x.b_h, st.x.a_h, inv["x"], dt_mu, t)
            kernels.cpml_hz_x(f.hz, f.ey, st.psi[("hz", "x")], st.x.b_h, st.x.a_h, inv["x"], dt_mu, t)
        if st.y is not None:
            kernels.cpml_hx_y(f.hx, f.ez, st.psi[("hx", "y")], st.y.b_h, st.y.a_h, inv["y"], dt_mu, t)
            kernels.cpml_hz_y(f.hz, f.ex, st.psi[("hz", "y")], st.y.b_h, st.y.a_h, inv["y"], dt_mu, t)
        if st.z is not None:
            kernels.cpml_hx_z(f.hx, f.ey, st.psi[("hx", "z")], st.z.b_h, st.z.a_h, inv["z"], dt_mu, t)
            kernels.cpml_hy_z(f.hy, f.ex, st.psi[("hy", "z")], st.z.b_h, st.z.a_h, inv["z"], dt_mu, t)

    def _apply_cpml_e(self):
        f, st, m = self.fields, self.cpml, self.mats
        t = st.params.thickness
        inv = self._inv
        if st.x is not None:
            kernels.cpml_ey_x(f.ey, f.hz, m.cb_ey, st.psi[("ey", "x")], st.x.b_e, st.x.a_e, inv["x"], t)
            kernels.cpml_ez_x(f.ez, f.hy, m.cb_ez, st.psi[("ez", "x")], st.x.b_e, st.x.a_e, inv["x"], t)
        if st.y is not None:
            kernels.cpml_ex_y(f.ex, f.hz, m.cb_ex, st.psi[("ex", "y")], st.y.b_e, st.y.a_e, inv["y"], t)
            kernels.cpml_ez_y(f.ez, f.hx, m.cb_ez, st.psi[("ez", "y")], st.y.b_e, st.y.a_e, inv["y"], t)
        if st.z is not None:
            kernels.cpml_ex_z(f.ex, f.hy, m.cb_ex, st.psi[("ex", "z")], st.z.b_e, st.z.a_e, inv["z"], t)
            kernels.cpml_ey_z(f.ey, f.hx, m.cb_ey, st.psi[("ey", "z")], st.z.b_e, st.z.a_e, inv["z"], t)

    def _apply_mirrors(self):
        f = self.fields
        bx, by, bz = self.boundaries
        if bx == "mirror":
            for a in (f.ey, f.ez):
                a[0, :, :] = a[1, :, :]
                a[-1, :, :] = a[-2, :, :]
        if by == "mirror":
            for a in (f.ex, f.ez):
                a[:, 0, :] = a[:, 1, :]
                a[:, -1, :] = a[:, -2, :]
        if bz == "mirror":
            for a in (f.ex, f.ey):
                a[:, :, 0] = a[:, :, 1]
                a[:, :, -1] = a[:, :, -2]

    # -- port sampling -----------------------------------------------------
    def port_voltage(self) -> float:
        p = self.port
        return float(-self.spec.dz * np.sum(self.fields.ez[p.i, p.j, p.k0:p.k1], dtype=np.float64))

    def port_current(self) -> float:
        p = self.port
        f = self.fields
        k = (p.k0 + p.k1) // 2
        hy_term = (f.hy[p.i, p.j, k] - f.hy[p.i - 1, p.j, k]) * self.spec.dy
        hx_term = (f.hx[p.i, p.j, k] - f.hx[p.i, p.j - 1, k]) * self.spec.dx
        return float(hy_term - hx_term)


def apply_lumped_port(fields: FieldState, port: LumpedPort, waveform: SourceWaveform, t: float):
    """Inject the Thevenin source contribution for source time t (the E
    update's midpoint).  Stepper calls this implicitly; exposed for tests."""
    vs = waveform(t)
    if vs != 0.0:
        fields.ez[port.i, port.j, port.k0:port.k1] += port.src_coef * fields.ez.dtype.type(vs)


def total_energy(fields: FieldState, mats: MaterialGrid) -> float:
    """Staggered-grid EM energy (J): (eps/2) E^2 + (mu0/2) H_old . H_new.

    With fields.h_prev unset the plain H^2 form is used, which oscillates
    at O(dt^2) for propagating solutions; the run loop always probes with
    the staggered form.
    """
    sp = fields.spec
    dv = sp.dx * sp.dy * sp.dz
    u = 0.0
    for comp, e in zip(("ex", "ey", "ez"), fields.e_arrays()):
        u += kernels.electric_energy(e, mats.ca(comp), mats.cb(comp), sp.dt, dv)
    h_old = fields.h_prev if fields.h_prev is not None else fields.h_arrays()
    for ho, hn in zip(h_old, fields.h_arrays()):
        u += kernels.magnetic_energy(ho, hn, MU0, dv)
    return float(u)


@dataclass(frozen=True)
class SimConfig:
    """Engine-level run settings (the CLI preset layer maps onto this)."""

    dxy: float | None = None
    cells_per_wavelength: int = 20
    min_feature_cells: int = 2
    f_max: float = 7.0e9
    courant: float = 0.99
    substrate_cells: int = 4
    npml: int = 10
    cpml: CpmlParams = field(default_factory=CpmlParams)
    waveform: SourceWaveform = field(default_factory=SourceWaveform)
    max_steps: int = 120_000
    energy_threshold: float = 1e-5
    energy_check_every: int = 50
    surface_freqs: tuple[float, ...] = ()
    huygens_inset: int = 8
    dtype: str = "float64"
    cell_budget: int = 12_000_000
    threads: int | None = None
    progress_every: int = 0
    log_path: str | None = None
    allow_divergence: bool = False

    def grid_limits(self) -> GridLimits:
        return GridLimits(
            courant=self.courant,
            npml=self.npml,
            substrate_cells=self.substrate_cells,
            cell_budget=self.cell_budget,
        )


def build_stepper(design: AntennaDesign, config: SimConfig) -> Stepper:
    """Grid + materials + port + optional surface recorder for a design."""
    spec = auto_grid(
        design,
        config.cells_per_wavelength,
        config.f_max,
        config.min_feature_cells,
        dxy=config.dxy,
        limits=config.grid_limits(),
    )
    dtype = np.dtype(config.dtype)
    mats = assign_materials(design, spec, dtype=dtype)
    port = make_lumped_port(design, spec, mats)
    recorder = None
    if config.surface_freqs:
        from .farfield import HuygensRecorder

        t = config.cpml.thickness
        inset = t + config.huygens_inset
        box = (inset, spec.nx - inset, inset, spec.ny - inset, inset, spec.nz - inset)
        recorder = HuygensRecorder(spec, box, tuple(config.surface_freqs))
    return Stepper(
        spec,
        mats,
        cpml_params=config.cpml,
        dtype=dtype,
        port=port,
        waveform=config.waveform,
        recorder=recorder,
    )


def run(design: AntennaDesign, config: SimConfig | None = None) -> RunResult:
    """Simulate a design to energy convergence and return port records plus
    any requested surface phasors.  Identical inputs give bit-identical
    results for any thread count."""
    config = config or SimConfig()
    if config.threads is not None:
        import numba

        numba.set_num_threads(max(1, min(config.threads, numba.config.NUMBA_NUM_THREADS)))

    stepper = build_stepper(design, config)
    spec = stepper.spec
    wf = config.waveform
    log_file = open(config.log_path, "w") if config.log_path else None

    n_max = config.max_steps
    v = np.zeros(n_max)
    i_rec = np.zeros(n_max)
    v_inc = np.zeros(n_max)
    energy_trace: list[tuple[int, float]] = []
    peak = 0.0
    termination = "steps exhausted"
    diverged_step = None
    steps_done = n_max
    t_start = _time.perf_counter()

    for n in range(n_max):
        probe = (n + 1) % config.energy_check_every == 0
        u = stepper.step(probe_energy=probe)
        t_e = stepper.fields.time
        v[n] = stepper.port_voltage()
        i_rec[n] = stepper.port_current()
        v_inc[n] = 0.5 * wf(t_e)

        if probe:
            energy_trace.append((n + 1, u))
            if not math.isfinite(u):
                diverged_step = n + 1
                termination = "diverged"
                steps_done = n + 1
                break
            peak = max(peak, u)
            if log_file:
                log_file.write(json.dumps({"step": n + 1, "time": t_e, "energy": u}) + "\n")
            if t_e > wf.end_time and (peak == 0.0 or u <= config.energy_threshold * peak):
                termination = "energy converged"
                steps_done = n + 1
                break
            if config.progress_every and (n + 1) % config.progress_every == 0:
                rate = (n + 1) / (_time.perf_counter() - t_start)
                eta = (n_max - n - 1) / rate
                rel = u / peak if peak > 0 else 0.0
                print(
                    f"[patchsim] step {n + 1}/{n_max}  t={t_e * 1e9:.2f} ns  "
                    f"E/Epk={rel:.3e}  {rate:.0f} steps/s  ETA<{eta:.0f}s",
                    file=sys.stderr,
                )

    if log_file:
        log_file.close()

    port_rec = PortRecord(
        spec.dt,
        v[:steps_done].copy(),
        i_rec[:steps_done].copy(),
        v_inc[:steps_done].copy(),
        reference_impedance=stepper.port.resistance,
        decayed=(termination == "energy converged"),
    )
    surface = stepper.recorder.finalize() if stepper.recorder is not None else None
    result = RunResult(
        port_rec, surface, termination, steps_done, peak, energy_trace, spec, diverged_step
    )
    if termination == "diverged" and not config.allow_divergence:
        err = DivergenceError(
            f"non-finite field energy at step {diverged_step}", step=diverged_step
        )
        err.partial_result = result
        raise err
    return result


def step(fields: FieldState, mats: MaterialGrid, cpml_state: CpmlState) -> FieldState:
    """Single source-free leapfrog cycle in functional form (testing aid);
    production loops use Stepper, which reuses buffers and handles sources."""
    st = Stepper.__new__(Stepper)
    st.spec = fields.spec
    st.mats = mats
    st.boundaries = tuple(
        "cpml" if cpml_state.axis(a) is not None else "pec" for a in "xyz"
    )
    st.dtype = fields.dtype
    st.port = None
    st.waveform = None
    st.recorder = None
    st.fields = fields
    st.cpml = cpml_state
    sc = st.dtype.type
    sp = fields.spec
    st._ik_e = {}
    st._ik_h = {}
    for name, size in zip("xyz", (sp.nx, sp.ny, sp.nz)):
        ax = cpml_state.axis(name)
        if ax is None:
            st._ik_e[name] = np.ones(size + 1, dtype=st.dtype)
            st._ik_h[name] = np.ones(size, dtype=st.dtype)
        else:
            st._ik_e[name] = ax.inv_kappa_e
            st._ik_h[name] = ax.inv_kappa_h
    st._dt_mu = sc(sp.dt / MU0)
    st._inv = {name: sc(1.0 / d) for name, d in zip("xyz", (sp.dx, sp.dy, sp.dz))}
    st._h_prev = tuple(np.zeros_like(a) for a in fields.h_arrays())
    st._dv = sp.dx * sp.dy * sp.dz
    st.step()
    return fields
