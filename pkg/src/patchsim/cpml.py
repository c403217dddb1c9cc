"""Convolutional PML: graded profiles, recursion coefficients and memory
buffers for the six absorber slabs.

Polynomial-graded sigma and kappa (max at the outer wall) with linearly
graded alpha (max at the interface).  The per-axis stretch shows up in the
main update as a 1/kappa factor on the spatial derivative plus a recursive
convolution term psi limited to the slab:

    psi_new = b * psi + a * d      (d = the raw spatial derivative)
    field  += coeff * psi_new

with b = exp(-(sigma/kappa + alpha) dt / eps0) and
a = sigma (b - 1) / (kappa (sigma + kappa alpha)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import EPS0, ETA0
from .errors import GeometryError
from .grid import GridSpec


@dataclass(frozen=True)
class CpmlParams:
    thickness: int = 10
    polynomial_order: float = 3.0
    sigma_max_ratio: float = 1.0
    kappa_max: float = 5.0
    alpha_max: float = 0.05

    def __post_init__(self):
        if self.thickness < 5:
            raise GeometryError(f"CPML thickness must be >= 5 cells, got {self.thickness}")
        for name in ("polynomial_order", "sigma_max_ratio", "kappa_max", "alpha_max"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"CpmlParams.{name} must be positive")


def _unchecked_cpml(**kwargs) -> CpmlParams:
    """Bypass validation; only for fault-injection in the validation suite."""
    obj = object.__new__(CpmlParams)
    defaults = dict(thickness=10, polynomial_order=3.0, sigma_max_ratio=1.0,
                    kappa_max=5.0, alpha_max=0.05)
    defaults.update(kwargs)
    for k, v in defaults.items():
        object.__setattr__(obj, k, v)
    return obj


def _profiles(depth_norm: np.ndarray, params: CpmlParams, spacing: float, dt: float):
    """(b, a, inv_kappa) at normalized depths into the absorber (0 = interface,
    1 = outer wall); entries with depth < 0 are outside and come back neutral."""
    inside = depth_norm >= 0.0
    d = np.clip(depth_norm, 0.0, 1.0)
    m = params.polynomial_order
    sigma_opt = 0.8 * (m + 1.0) / (ETA0 * spacing)
    sigma = params.sigma_max_ratio * sigma_opt * d ** m
    kappa = 1.0 + (params.kappa_max - 1.0) * d ** m
    alpha = params.alpha_max * (1.0 - d)
    b = np.exp(-(sigma / kappa + alpha) * dt / EPS0)
    denom = kappa * (sigma + kappa * alpha)
    a = np.where(denom > 0.0, sigma * (b - 1.0) / np.where(denom > 0.0, denom, 1.0), 0.0)
    b = np.where(inside, b, 1.0)
    a = np.where(inside, a, 0.0)
    inv_kappa = np.where(inside, 1.0 / kappa, 1.0)
    return b, a, inv_kappa


@dataclass
class AxisCoeffs:
    """CPML recursion coefficients along one axis for integer (E) and
    half-integer (H) node positions, plus full-axis 1/kappa arrays."""

    n_lo: int                 # slab thickness in cells on the low side (0 = none)
    n_hi: int
    b_e: np.ndarray           # length n+1, at integer nodes
    a_e: np.ndarray
    inv_kappa_e: np.ndarray
    b_h: np.ndarray           # length n, at half-integer nodes
    a_h: np.ndarray
    inv_kappa_h: np.ndarray


def axis_coefficients(
    n: int, spacing: float, dt: float, params: CpmlParams,
    lo: bool = True, hi: bool = True, dtype=np.float64,
) -> AxisCoeffs:
    t = params.thickness
    e_pos = np.arange(n + 1, dtype=np.float64)
    h_pos = e_pos[:-1] + 0.5
    depth_e = np.full(n + 1, -1.0)
    depth_h = np.full(n, -1.0)
    if lo:
        depth_e = np.maximum(depth_e, (t - e_pos) / t)
        depth_h = np.maximum(depth_h, (t - h_pos) / t)
    if hi:
        depth_e = np.maximum(depth_e, (e_pos - (n - t)) / t)
        depth_h = np.maximum(depth_h, (h_pos - (n - t)) / t)
    b_e, a_e, ik_e = _profiles(depth_e, params, spacing, dt)
    b_h, a_h, ik_h = _profiles(depth_h, params, spacing, dt)
    return AxisCoeffs(
        t if lo else 0,
        t if hi else 0,
        b_e.astype(dtype), a_e.astype(dtype), ik_e.astype(dtype),
        b_h.astype(dtype), a_h.astype(dtype), ik_h.astype(dtype),
    )


@dataclass
class CpmlState:
    """Memory (psi) buffers for every active slab.

    Keyed as psi[(field_comp, stretch_axis)]; each buffer matches the field
    component's shape with the stretched axis reduced to 2*thickness (low
    slab first, high slab second), mirroring the kernels' slab layout.
    """

    params: CpmlParams
    x: AxisCoeffs | None
    y: AxisCoeffs | None
    z: AxisCoeffs | None
    psi: dict = field(default_factory=dict)

    def axis(self, name: str) -> AxisCoeffs | None:
        return getattr(self, name)


_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

# For each E/H component, the two (stretch axis, source field) pairs of its curl.
E_CURL = {
    "ex": (("y", "hz"), ("z", "hy")),
    "ey": (("z", "hx"), ("x", "hz")),
    "ez": (("x", "hy"), ("y", "hx")),
}
H_CURL = {
    "hx": (("y", "ez"), ("z", "ey")),
    "hy": (("z", "ex"), ("x", "ez")),
    "hz": (("x", "ey"), ("y", "ex")),
}


def build_cpml(
    spec: GridSpec,
    params: CpmlParams,
    active_axes: tuple[bool, bool, bool] = (True, True, True),
    dtype=np.float64,
) -> CpmlState:
    """Coefficients plus zeroed psi buffers for the requested axes."""
    t = params.thickness
    sizes = (spec.nx, spec.ny, spec.nz)
    spacings = (spec.dx, spec.dy, spec.dz)
    axes = {}
    for name, size, spacing, active in zip("xyz", sizes, spacings, active_axes):
        if not active:
            axes[name] = None
            continue
        if size < 2 * t + 4:
            raise GeometryError(
                f"grid too small for a {t}-cell absorber along {name}: n{name} = {size}"
            )
        axes[name] = axis_coefficients(size, spacing, spec.dt, params, dtype=dtype)

    state = CpmlState(params, axes["x"], axes["y"], axes["z"])
    from .grid import E_SHAPES, H_SHAPES

    shapes = dict(E_SHAPES)
    shapes.update(H_SHAPES)
    for comp, pairs in list(E_CURL.items()) + list(H_CURL.items()):
        shape = shapes[comp](*sizes)
        for axis_name, _src in pairs:
            if axes[axis_name] is None:
                continue
            ai = _AXIS_INDEX[axis_name]
            slab_shape = list(shape)
            slab_shape[ai] = 2 * t
            state.psi[(comp, axis_name)] = np.zeros(tuple(slab_shape), dtype=dtype)
    return state
