"""Uniform staggered Yee grid: spacing selection, CFL time step, material
coefficients and PEC sheet masks.

Conventions fixed here and relied on everywhere else:

- node (i, j, k) sits at origin + (i dx, j dy, k dz)
- Ex[i,j,k] at (i+1/2, j, k) cells, shape (nx, ny+1, nz+1); Ey and Ez cyclic
- Hx[i,j,k] at (i, j+1/2, k+1/2), shape (nx+1, ny, nz); Hy and Hz cyclic
- design coordinates put z = 0 on the ground sheet; the substrate fills
  0 < z < substrate_height and the patch sheet lies at z = substrate_height
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, EPS0
from .errors import BudgetError, CoverageError, GeometryError
from .geometry import AntennaDesign

DEFAULT_COURANT = 0.99


def cfl_limit(dx: float, dy: float, dz: float) -> float:
    """Largest stable time step of the 3-D Yee scheme."""
    return 1.0 / (C0 * math.sqrt(1.0 / dx ** 2 + 1.0 / dy ** 2 + 1.0 / dz ** 2))


@dataclass(frozen=True)
class GridSpec:
    dx: float
    dy: float
    dz: float
    nx: int
    ny: int
    nz: int
    dt: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("dx", "dy", "dz", "dt"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"GridSpec.{name} must be positive")
        for name in ("nx", "ny", "nz"):
            if getattr(self, name) < 1:
                raise GeometryError(f"GridSpec.{name} must be >= 1")
        if self.dt > cfl_limit(self.dx, self.dy, self.dz) * (1.0 + 1e-12):
            raise GeometryError(
                f"dt = {self.dt:.4g} violates the CFL bound "
                f"{cfl_limit(self.dx, self.dy, self.dz):.4g}"
            )

    @property
    def cell_count(self) -> int:
        return self.nx * self.ny * self.nz

    def nodes(self, axis: str) -> np.ndarray:
        n, d, o = {
            "x": (self.nx, self.dx, self.origin[0]),
            "y": (self.ny, self.dy, self.origin[1]),
            "z": (self.nz, self.dz, self.origin[2]),
        }[axis]
        return o + d * np.arange(n + 1)

    def centers(self, axis: str) -> np.ndarray:
        n, d, o = {
            "x": (self.nx, self.dx, self.origin[0]),
            "y": (self.ny, self.dy, self.origin[1]),
            "z": (self.nz, self.dz, self.origin[2]),
        }[axis]
        return o + d * (np.arange(n) + 0.5)

    def node_index(self, axis: str, coord: float) -> int:
        o = {"x": self.origin[0], "y": self.origin[1], "z": self.origin[2]}[axis]
        d = {"x": self.dx, "y": self.dy, "z": self.dz}[axis]
        return int(round((coord - o) / d))


def cfl_timestep(spec: GridSpec, courant: float = DEFAULT_COURANT) -> float:
    """dt = courant / (c sqrt(1/dx^2 + 1/dy^2 + 1/dz^2)); courant in (0, 1]."""
    if not 0.0 < courant <= 1.0:
        raise GeometryError(f"courant must be in (0, 1], got {courant}")
    return courant * cfl_limit(spec.dx, spec.dy, spec.dz)


E_SHAPES = {
    "ex": lambda nx, ny, nz: (nx, ny + 1, nz + 1),
    "ey": lambda nx, ny, nz: (nx + 1, ny, nz + 1),
    "ez": lambda nx, ny, nz: (nx + 1, ny + 1, nz),
}
H_SHAPES = {
    "hx": lambda nx, ny, nz: (nx + 1, ny, nz),
    "hy": lambda nx, ny, nz: (nx, ny + 1, nz),
    "hz": lambda nx, ny, nz: (nx, ny, nz + 1),
}


@dataclass
class FieldState:
    """The six field arrays plus step counter and simulated time."""

    spec: GridSpec
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    step: int = 0
    time: float = 0.0
    # previous half-step H, populated while energy probing is active
    h_prev: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @classmethod
    def zeros(cls, spec: GridSpec, dtype=np.float64) -> "FieldState":
        n = (spec.nx, spec.ny, spec.nz)
        return cls(
            spec,
            *(np.zeros(E_SHAPES[c](*n), dtype=dtype) for c in ("ex", "ey", "ez")),
            *(np.zeros(H_SHAPES[c](*n), dtype=dtype) for c in ("hx", "hy", "hz")),
        )

    @property
    def dtype(self):
        return self.ex.dtype

    def e_arrays(self):
        return (self.ex, self.ey, self.ez)

    def h_arrays(self):
        return (self.hx, self.hy, self.hz)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) for a in (*self.e_arrays(), *self.h_arrays()))


@dataclass
class MaterialGrid:
    """Per-E-component update coefficients and PEC sheet masks.

    In vacuum ca = 1 and cb = dt/eps0 (the curl divides by the spatial steps
    separately).  PEC-pinned edges carry ca = cb = 0 so they stay exactly
    zero; the boolean masks record which edges those are.
    """

    spec: GridSpec
    ca_ex: np.ndarray
    cb_ex: np.ndarray
    ca_ey: np.ndarray
    cb_ey: np.ndarray
    ca_ez: np.ndarray
    cb_ez: np.ndarray
    pec_ex: np.ndarray
    pec_ey: np.ndarray
    pec_ez: np.ndarray
    # informational: cell-centered conductor mask of the patch sheet and its k-plane
    patch_plane_k: int | None = None
    ground_plane_k: int | None = None

    def ca(self, comp: str) -> np.ndarray:
        return getattr(self, f"ca_{comp}")

    def cb(self, comp: str) -> np.ndarray:
        return getattr(self, f"cb_{comp}")


def _sigma_equivalent(eps_r: float, tan_delta: float, f0: float) -> float:
    """Constant conductivity matching the loss tangent at f0."""
    return 2.0 * math.pi * f0 * EPS0 * eps_r * tan_delta


def _edge_average(cells: np.ndarray, comp: str) -> np.ndarray:
    """Average the 4 cells sharing each E edge; boundary cells replicate."""
    pad_axes = {"ex": ((0, 0), (1, 1), (1, 1)),
                "ey": ((1, 1), (0, 0), (1, 1)),
                "ez": ((1, 1), (1, 1), (0, 0))}[comp]
    p = np.pad(cells, pad_axes, mode="edge")
    if comp == "ex":
        return 0.25 * (p[:, :-1, :-1] + p[:, 1:, :-1] + p[:, :-1, 1:] + p[:, 1:, 1:])
    if comp == "ey":
        return 0.25 * (p[:-1, :, :-1] + p[1:, :, :-1] + p[:-1, :, 1:] + p[1:, :, 1:])
    return 0.25 * (p[:-1, :-1, :] + p[1:, :-1, :] + p[:-1, 1:, :] + p[1:, 1:, :])


def _sheet_masks(cell_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tangential-edge pin masks on a sheet plane from a cell-centered mask.

    An edge is pinned when either adjacent cell is conductor, so every
    conductor cell pins the two tangential components it owns.
    """
    nx, ny = cell_mask.shape
    ex = np.zeros((nx, ny + 1), dtype=bool)
    ex[:, :-1] |= cell_mask
    ex[:, 1:] |= cell_mask
    ey = np.zeros((nx + 1, ny), dtype=bool)
    ey[:-1, :] |= cell_mask
    ey[1:, :] |= cell_mask
    return ex, ey


def coefficients_from_cells(spec: GridSpec, eps_r_cells: np.ndarray,
                            sigma_cells: np.ndarray, dtype=np.float64) -> dict:
    """Edge-averaged Ca/Cb update coefficients from cell-centered material
    values; the averaging is what keeps interface accuracy second order."""
    dt = spec.dt
    out = {}
    for comp in ("ex", "ey", "ez"):
        e = _edge_average(np.asarray(eps_r_cells, dtype=np.float64), comp) * EPS0
        s = _edge_average(np.asarray(sigma_cells, dtype=np.float64), comp)
        denom = 1.0 + s * dt / (2.0 * e)
        out[f"ca_{comp}"] = ((1.0 - s * dt / (2.0 * e)) / denom).astype(dtype)
        out[f"cb_{comp}"] = ((dt / e) / denom).astype(dtype)
    return out


def material_grid_from_cells(spec: GridSpec, eps_r_cells: np.ndarray,
                             sigma_cells: np.ndarray | None = None,
                             dtype=np.float64) -> MaterialGrid:
    """MaterialGrid for arbitrary cell-centered material maps with no PEC
    sheets (validation structures: uniform fills, slabs, blocks)."""
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    if sigma_cells is None:
        sigma_cells = np.zeros((nx, ny, nz))
    grids = coefficients_from_cells(spec, eps_r_cells, sigma_cells, dtype)
    pec = {c: np.zeros(E_SHAPES[c](nx, ny, nz), dtype=bool) for c in ("ex", "ey", "ez")}
    return MaterialGrid(
        spec,
        grids["ca_ex"], grids["cb_ex"],
        grids["ca_ey"], grids["cb_ey"],
        grids["ca_ez"], grids["cb_ez"],
        pec["ex"], pec["ey"], pec["ez"],
    )


def uniform_material_grid(spec: GridSpec, eps_r: float = 1.0, sigma: float = 0.0,
                          dtype=np.float64) -> MaterialGrid:
    n = (spec.nx, spec.ny, spec.nz)
    return material_grid_from_cells(
        spec, np.full(n, eps_r), np.full(n, sigma), dtype=dtype
    )


def assign_materials(
    design: AntennaDesign,
    spec: GridSpec,
    *,
    dtype=np.float64,
) -> MaterialGrid:
    """Map the design onto per-component Ca/Cb coefficient arrays.

    Substrate cells get the design permittivity and the equivalent
    conductivity evaluated at the analysis-band center; patch and ground
    conductors become zero-thickness PEC sheets on the nearest node planes;
    everything else is vacuum.
    """
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    h = design.stack.substrate_height

    k_gnd = spec.node_index("z", 0.0)
    k_patch = spec.node_index("z", h)
    if not (0 <= k_gnd < k_patch <= nz):
        raise CoverageError(
            f"substrate z-range [0, {h:.4g}] not covered by the grid "
            f"(k_gnd={k_gnd}, k_patch={k_patch}, nz={nz})"
        )
    bx0, by0, bw, bd = design.board_rect()
    xc, yc, zc = spec.centers("x"), spec.centers("y"), spec.centers("z")
    if not design.substrate_fills_grid:
        if bx0 < spec.origin[0] or by0 < spec.origin[1] \
                or bx0 + bw > spec.origin[0] + nx * spec.dx \
                or by0 + bd > spec.origin[1] + ny * spec.dy:
            raise CoverageError("board extent exceeds the grid footprint")

    # cell-centered permittivity / conductivity
    eps = np.ones((nx, ny, nz), dtype=np.float64)
    sig = np.zeros((nx, ny, nz), dtype=np.float64)
    in_z = (zc > 0.0) & (zc < h)
    if design.substrate_fills_grid:
        in_board = np.ones((nx, ny), dtype=bool)
    else:
        in_board = ((xc >= bx0) & (xc < bx0 + bw))[:, None] & ((yc >= by0) & (yc < by0 + bd))[None, :]
    region = in_board[:, :, None] & in_z[None, None, :]
    f0 = 0.5 * (design.analysis_band[0] + design.analysis_band[1])
    mat = design.stack.substrate
    eps[region] = mat.rel_permittivity
    sig[region] = _sigma_equivalent(mat.rel_permittivity, mat.loss_tangent, f0)

    grids = coefficients_from_cells(spec, eps, sig, dtype)

    # PEC sheets: patch layout at z = h, ground over the board at z = 0
    patch_cells = design.layout.sample(xc, yc)
    gnd_cells = in_board
    pec_ex = np.zeros(E_SHAPES["ex"](nx, ny, nz), dtype=bool)
    pec_ey = np.zeros(E_SHAPES["ey"](nx, ny, nz), dtype=bool)
    pec_ez = np.zeros(E_SHAPES["ez"](nx, ny, nz), dtype=bool)
    for k_plane, cells in ((k_patch, patch_cells), (k_gnd, gnd_cells)):
        mx, my = _sheet_masks(cells)
        pec_ex[:, :, k_plane] |= mx
        pec_ey[:, :, k_plane] |= my
    for comp, mask in (("ex", pec_ex), ("ey", pec_ey), ("ez", pec_ez)):
        grids[f"ca_{comp}"][mask] = 0.0
        grids[f"cb_{comp}"][mask] = 0.0

    return MaterialGrid(
        spec,
        grids["ca_ex"], grids["cb_ex"],
        grids["ca_ey"], grids["cb_ey"],
        grids["ca_ez"], grids["cb_ez"],
        pec_ex, pec_ey, pec_ez,
        patch_plane_k=k_patch,
        ground_plane_k=k_gnd,
    )


@dataclass(frozen=True)
class GridLimits:
    """Knobs for auto_grid that rarely change."""

    courant: float = DEFAULT_COURANT
    npml: int = 10
    lateral_air_cells: int = 12
    below_air_cells: int = 12
    min_above_cells: int = 12
    substrate_cells: int = 4
    cell_budget: int = 12_000_000


def auto_grid(
    design: AntennaDesign,
    cells_per_wavelength: int = 20,
    f_max: float = 7.0e9,
    min_feature_cells: int = 2,
    *,
    dxy: float | None = None,
    limits: GridLimits = GridLimits(),
) -> GridSpec:
    """Choose a uniform grid for the design.

    In-plane spacing is the tighter of the wavelength rule (lambda_min at
    f_max in the substrate over cells_per_wavelength) and the feature rule
    (smallest layout feature over min_feature_cells); an explicit dxy
    overrides both (presets use this).  Vertical spacing puts
    limits.substrate_cells across the substrate.  The grid spans the board
    plus air margins plus the absorber; the margin above the patch is at
    least lambda_min/4.
    """
    if cells_per_wavelength < 10:
        raise GeometryError(f"cells_per_wavelength must be >= 10, got {cells_per_wavelength}")
    if min_feature_cells < 1:
        raise GeometryError(f"min_feature_cells must be >= 1, got {min_feature_cells}")

    er = design.stack.substrate.rel_permittivity
    lam_min = C0 / (f_max * math.sqrt(er))
    if dxy is None:
        dxy = lam_min / cells_per_wavelength
        feature = design.layout.min_feature()
        if math.isfinite(feature):
            dxy = min(dxy, feature / min_feature_cells)

    h = design.stack.substrate_height
    dz = h / limits.substrate_cells

    bx0, by0, bw, bd = design.board_rect()
    edge = limits.npml + limits.lateral_air_cells
    nx = int(math.ceil(bw / dxy - 1e-9)) + 2 * edge
    ny = int(math.ceil(bd / dxy - 1e-9)) + 2 * edge
    above_cells = max(limits.min_above_cells, int(math.ceil(lam_min / 4.0 / dz)))
    below = limits.npml + limits.below_air_cells
    nz = below + limits.substrate_cells + above_cells + limits.npml

    total = nx * ny * nz
    if total > limits.cell_budget:
        worst = max((("nx", nx), ("ny", ny), ("nz", nz)), key=lambda kv: kv[1])
        raise BudgetError(
            f"grid of {nx} x {ny} x {nz} = {total} cells exceeds the budget of "
            f"{limits.cell_budget}; largest dimension is {worst[0]} = {worst[1]}",
            axis=worst[0],
        )

    origin = (bx0 - edge * dxy, by0 - edge * dxy, -below * dz)
    dt = limits.courant * cfl_limit(dxy, dxy, dz)
    return GridSpec(dxy, dxy, dz, nx, ny, nz, dt, origin)
