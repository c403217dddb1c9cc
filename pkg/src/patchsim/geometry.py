"""Materials, substrate stack and 2D conductor layouts built from rectangles.

A layout is an ordered list of axis-aligned rectangles, each either adding
conductor or cutting it away.  Later operations win: a cut removes material
from every earlier add, and a later add refills earlier cuts.  Containment
uses the half-open convention [x0, x0+w) x [y0, y0+h), so abutting
rectangles never double-count their shared edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GeometryError


@dataclass(frozen=True)
class Material:
    name: str
    rel_permittivity: float = 1.0
    loss_tangent: float = 0.0
    is_conductor: bool = False

    def __post_init__(self):
        if self.is_conductor:
            return
        if self.rel_permittivity < 1.0:
            raise GeometryError(f"rel_permittivity must be >= 1, got {self.rel_permittivity}")
        if self.loss_tangent < 0.0:
            raise GeometryError(f"loss_tangent must be >= 0, got {self.loss_tangent}")


# Conductors are treated as PEC sheets; only the name matters.
COPPER = Material("copper", is_conductor=True)
RT_DUROID_5880 = Material("RT/duroid 5880", rel_permittivity=2.2, loss_tangent=0.0009)
VACUUM = Material("vacuum", rel_permittivity=1.0, loss_tangent=0.0)


@dataclass(frozen=True)
class Rect2D:
    """Axis-aligned rectangle in board coordinates (meters); op is 'add' or 'cut'."""

    x0: float
    y0: float
    width: float
    height: float
    op: str = "add"

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise GeometryError(
                f"rectangle sides must be positive, got {self.width} x {self.height}"
            )
        if self.op not in ("add", "cut"):
            raise GeometryError(f"rectangle op must be 'add' or 'cut', got {self.op!r}")

    @property
    def x1(self) -> float:
        return self.x0 + self.width

    @property
    def y1(self) -> float:
        return self.y0 + self.height

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def intersects(self, other: "Rect2D") -> bool:
        return (self.x0 < other.x1 and other.x0 < self.x1
                and self.y0 < other.y1 and other.y0 < self.y1)


@dataclass(frozen=True)
class PatchLayout:
    """Ordered rectangle sequence evaluated front to back."""

    rects: tuple[Rect2D, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rects", tuple(self.rects))

    def bounding_box(self) -> tuple[float, float, float, float] | None:
        """(x0, y0, x1, y1) over all rectangles, or None for an empty layout."""
        if not self.rects:
            return None
        x0 = min(r.x0 for r in self.rects)
        y0 = min(r.y0 for r in self.rects)
        x1 = max(r.x1 for r in self.rects)
        y1 = max(r.y1 for r in self.rects)
        return (x0, y0, x1, y1)

    def min_feature(self) -> float:
        """Smallest rectangle side; cuts count as features too.  inf if empty."""
        if not self.rects:
            return math.inf
        return min(min(r.width, r.height) for r in self.rects)

    def contains(self, x: float, y: float) -> bool:
        inside = False
        for r in self.rects:
            if r.contains(x, y):
                inside = r.op == "add"
        return inside

    def sample(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Boolean conductor mask on the tensor grid of x and y sample points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mask = np.zeros((x.size, y.size), dtype=bool)
        for r in self.rects:
            ix = np.flatnonzero((x >= r.x0) & (x < r.x1))
            iy = np.flatnonzero((y >= r.y0) & (y < r.y1))
            if ix.size and iy.size:
                mask[np.ix_(ix, iy)] = r.op == "add"
        return mask


def layout_area(layout: PatchLayout) -> float:
    """Exact area (m^2) of the evaluated conductor region.

    Uses coordinate compression: rectangle edges split the plane into cells
    on which every rectangle is constant, so sequential evaluation on the
    compressed grid is exact.
    """
    if not layout.rects:
        return 0.0
    xs = np.unique([v for r in layout.rects for v in (r.x0, r.x1)])
    ys = np.unique([v for r in layout.rects for v in (r.y0, r.y1)])
    xc = 0.5 * (xs[:-1] + xs[1:])
    yc = 0.5 * (ys[:-1] + ys[1:])
    occupied = layout.sample(xc, yc)
    wx = np.diff(xs)
    wy = np.diff(ys)
    return float(np.einsum("ij,i,j->", occupied, wx, wy))


@dataclass(frozen=True)
class BitGrid2D:
    """Rasterized conductor mask; values[i, j] covers cell (i, j) of size
    resolution with lower-left corner at origin."""

    origin: tuple[float, float]
    resolution: float
    values: np.ndarray
    under_resolved: bool = False

    def area(self) -> float:
        return float(np.count_nonzero(self.values)) * self.resolution ** 2

    def __eq__(self, other):
        if not isinstance(other, BitGrid2D):
            return NotImplemented
        return (self.origin == other.origin
                and self.resolution == other.resolution
                and self.under_resolved == other.under_resolved
                and np.array_equal(self.values, other.values))


def conductor_mask(layout: PatchLayout, resolution: float) -> BitGrid2D:
    """Rasterize the layout: cells whose centers lie inside the conductor.

    The grid covers the layout bounding box.  Result carries an
    under-resolved flag when the resolution is coarser than half the
    smallest feature.
    """
    if resolution <= 0.0:
        raise GeometryError(f"resolution must be positive, got {resolution}")
    bbox = layout.bounding_box()
    if bbox is None:
        return BitGrid2D((0.0, 0.0), resolution, np.zeros((0, 0), dtype=bool))
    x0, y0, x1, y1 = bbox
    nx = max(1, int(math.ceil((x1 - x0) / resolution - 1e-9)))
    ny = max(1, int(math.ceil((y1 - y0) / resolution - 1e-9)))
    xc = x0 + (np.arange(nx) + 0.5) * resolution
    yc = y0 + (np.arange(ny) + 0.5) * resolution
    values = layout.sample(xc, yc)
    under = resolution > 0.5 * layout.min_feature()
    return BitGrid2D((x0, y0), resolution, values, under_resolved=under)


def write_pgm(mask: BitGrid2D, path) -> None:
    """Debug bitmap: binary PGM, one byte per cell, 255 = conductor.

    Rows run north to south so the file views like the layout.
    """
    img = np.where(mask.values.T[::-1, :], 255, 0).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


@dataclass(frozen=True)
class SubstrateStack:
    """Dielectric slab over a ground sheet.  board_extent is (width, depth),
    centered on the conductor layout's bounding-box center."""

    substrate: Material
    substrate_height: float
    ground_thickness: float = 0.1e-3
    board_extent: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.substrate_height <= 0.0:
            raise GeometryError(f"substrate_height must be > 0, got {self.substrate_height}")
        if self.ground_thickness < 0.0:
            raise GeometryError(f"ground_thickness must be >= 0, got {self.ground_thickness}")


@dataclass(frozen=True)
class PortSpec:
    """Lumped-port location on the feed conductor; drives the vertical gap
    between conductor and ground.  axis is the in-plane launch direction."""

    position: tuple[float, float]
    axis: str = "+y"
    reference_impedance: float = 50.0

    def __post_init__(self):
        if self.reference_impedance <= 0.0:
            raise GeometryError(
                f"reference_impedance must be > 0, got {self.reference_impedance}"
            )
        if self.axis not in ("+x", "-x", "+y", "-y"):
            raise GeometryError(f"port axis must be one of +x -x +y -y, got {self.axis!r}")


@dataclass(frozen=True)
class AntennaDesign:
    """Complete simulation input: stack + layout + port + analysis band."""

    stack: SubstrateStack
    layout: PatchLayout
    port: PortSpec
    analysis_band: tuple[float, float] = (4.0e9, 4.5e9)
    # Validation structures (matched lines, slabs) set this to let the
    # substrate and ground extend laterally through the absorber.
    substrate_fills_grid: bool = False

    def __post_init__(self):
        f_lo, f_hi = self.analysis_band
        if not f_lo < f_hi:
            raise GeometryError(f"analysis band must satisfy f_lo < f_hi, got {self.analysis_band}")
        if not self.layout.contains(*self.port.position):
            raise GeometryError(
                f"port position {self.port.position} does not lie on the conductor layout"
            )
        bbox = self.layout.bounding_box()
        if bbox is not None and not self.substrate_fills_grid:
            bx, by = self.board_rect()[2:]
            x0, y0, x1, y1 = bbox
            if x1 - x0 >= bx or y1 - y0 >= by:
                raise GeometryError(
                    "board_extent must strictly contain the layout bounding box: "
                    f"layout {(x1 - x0, y1 - y0)} vs board {(bx, by)}"
                )

    def board_rect(self) -> tuple[float, float, float, float]:
        """(x0, y0, width, depth) of the board, centered on the layout bbox."""
        bbox = self.layout.bounding_box()
        if bbox is None:
            cx = cy = 0.0
        else:
            cx = 0.5 * (bbox[0] + bbox[2])
            cy = 0.5 * (bbox[1] + bbox[3])
        w, d = self.stack.board_extent
        return (cx - w / 2.0, cy - d / 2.0, w, d)

    def with_band(self, band: tuple[float, float]) -> "AntennaDesign":
        return replace(self, analysis_band=band)
