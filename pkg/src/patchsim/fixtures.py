"""Antenna fixtures: the two published U-patch designs plus validation structures.

All dimensions live in the parameter dataclasses so sweeps can address them
by path (e.g. ``substrate_height`` or ``stub_widths[3]``).  Lengths are
meters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cavity import PatchModel, design_patch, resonant_frequency
from .errors import GeometryError
from .geometry import (
    AntennaDesign,
    Material,
    PatchLayout,
    PortSpec,
    Rect2D,
    SubstrateStack,
)


@dataclass(frozen=True)
class SimpleUParams:
    """Published simple U-shaped patch, edge-fed by a microstrip line.

    The U slot is two vertical arm cuts joined by a horizontal base cut; the
    base spans the arms' outer edges and the open side faces the edge
    opposite the feed.  slot_offset (feed edge to base bottom) defaults to
    vertical centering of the whole slot; arm symmetry about the feed axis
    is fixed, the offset is not.
    """

    patch_width: float = 47.43e-3
    patch_length: float = 39.098e-3
    feed_length: float = 28.1e-3
    feed_width: float = 3.0e-3
    arm_length: float = 20.0e-3
    arm_width: float = 3.0e-3
    base_length: float = 29.0e-3
    base_width: float = 0.7e-3
    slot_offset: float | None = None
    substrate_height: float = 2.4e-3
    rel_permittivity: float = 2.2
    loss_tangent: float = 0.0009
    ground_thickness: float = 0.1e-3
    board_margin: float = 20.0e-3
    port_inset: float = 0.5e-3
    reference_impedance: float = 50.0

    def resolved_slot_offset(self) -> float:
        if self.slot_offset is not None:
            return self.slot_offset
        return 0.5 * (self.patch_length - self.arm_length - self.base_width)


@dataclass(frozen=True)
class ModifiedUParams:
    """Simple design plus seven notch cuts on the edge opposite the feed."""

    base: SimpleUParams = field(default_factory=SimpleUParams)
    stub_depth: float = 4.0e-3
    stub_widths: tuple[float, ...] = (0.5e-3, 1.4e-3, 0.5e-3, 2.0e-3, 0.5e-3, 1.4e-3, 2.0e-3)

    def __post_init__(self):
        if len(self.stub_widths) != 7:
            raise GeometryError(f"expected 7 stubs, got {len(self.stub_widths)}")


def _u_patch_rects(p: SimpleUParams) -> list[Rect2D]:
    w, l = p.patch_width, p.patch_length
    slot0 = p.resolved_slot_offset()
    rects = [
        Rect2D(-w / 2, 0.0, w, l, "add"),
        Rect2D(-p.feed_width / 2, -p.feed_length, p.feed_width, p.feed_length, "add"),
        # U base, then the two arms rising from its ends.
        Rect2D(-p.base_length / 2, slot0, p.base_length, p.base_width, "cut"),
        Rect2D(-p.base_length / 2, slot0 + p.base_width, p.arm_width, p.arm_length, "cut"),
        Rect2D(p.base_length / 2 - p.arm_width, slot0 + p.base_width,
               p.arm_width, p.arm_length, "cut"),
    ]
    patch = rects[0]
    for cut in rects[2:]:
        if not (patch.x0 < cut.x0 and cut.x1 < patch.x1
                and patch.y0 < cut.y0 and cut.y1 < patch.y1):
            raise GeometryError(
                f"U-slot cut {cut} falls outside the patch {patch}; "
                "check slot_offset / arm and base dimensions"
            )
    return rects


def _stack_and_port(p: SimpleUParams, layout: PatchLayout) -> tuple[SubstrateStack, PortSpec]:
    bbox = layout.bounding_box()
    extent = (bbox[2] - bbox[0] + 2 * p.board_margin, bbox[3] - bbox[1] + 2 * p.board_margin)
    substrate = Material("substrate", p.rel_permittivity, p.loss_tangent)
    stack = SubstrateStack(substrate, p.substrate_height, p.ground_thickness, extent)
    port = PortSpec((0.0, -p.feed_length + p.port_inset), "+y", p.reference_impedance)
    return stack, port


def build_simple_u_patch(params: SimpleUParams | None = None) -> AntennaDesign:
    """Simple U-shaped patch on its published stack, edge-fed, port at the
    board-edge end of the feed line."""
    p = params or SimpleUParams()
    layout = PatchLayout(tuple(_u_patch_rects(p)))
    stack, port = _stack_and_port(p, layout)
    return AntennaDesign(stack, layout, port)


def _stub_rects(p: ModifiedUParams) -> list[Rect2D]:
    b = p.base
    total = sum(p.stub_widths)
    gap = (b.patch_width - total) / (len(p.stub_widths) + 1)
    if gap <= 0.0:
        raise GeometryError("stubs wider than the patch edge")
    rects = []
    x = -b.patch_width / 2
    for width in p.stub_widths:
        x += gap
        rects.append(Rect2D(x, b.patch_length - p.stub_depth, width, p.stub_depth, "cut"))
        x += width
    return rects


def build_modified_u_patch(params: ModifiedUParams | None = None) -> AntennaDesign:
    """Simple design with seven evenly spaced notch cuts (equal gaps, ends
    included) on the radiating edge opposite the feed."""
    p = params or ModifiedUParams()
    u_rects = _u_patch_rects(p.base)
    stubs = _stub_rects(p)
    slot_cuts = u_rects[2:]
    for i, s in enumerate(stubs):
        for other in stubs[i + 1:]:
            if s.intersects(other):
                raise GeometryError(f"stubs overlap: {s} and {other}")
        for cut in slot_cuts:
            if s.intersects(cut):
                raise GeometryError(f"stub {s} overlaps the U slot cut {cut}")
    layout = PatchLayout(tuple(u_rects + stubs))
    stack, port = _stack_and_port(p.base, layout)
    return AntennaDesign(stack, layout, port)


@dataclass(frozen=True)
class PlainPatchParams:
    """Probe-fed plain rectangular patch used to validate the solver against
    the cavity model.  Width/length default to the 2.5 GHz synthesis on the
    published stack; the probe sits at a third of the resonant length."""

    target_frequency: float = 2.5e9
    rel_permittivity: float = 2.2
    loss_tangent: float = 0.0009
    substrate_height: float = 2.4e-3
    board_margin: float = 15.0e-3
    feed_fraction: float = 1.0 / 3.0
    reference_impedance: float = 50.0


def build_plain_patch(params: PlainPatchParams | None = None) -> AntennaDesign:
    p = params or PlainPatchParams()
    w, l = design_patch(p.target_frequency, p.rel_permittivity, p.substrate_height)
    layout = PatchLayout((Rect2D(-w / 2, 0.0, w, l, "add"),))
    extent = (w + 2 * p.board_margin, l + 2 * p.board_margin)
    substrate = Material("substrate", p.rel_permittivity, p.loss_tangent)
    stack = SubstrateStack(substrate, p.substrate_height, 0.1e-3, extent)
    port = PortSpec((0.0, p.feed_fraction * l), "+y", p.reference_impedance)
    band = (0.9 * p.target_frequency, 1.1 * p.target_frequency)
    return AntennaDesign(stack, layout, port, analysis_band=band)


@dataclass(frozen=True)
class MicroPatchParams:
    """Small probe-fed patch resonating mid-band, for fast end-to-end tests
    (tens of seconds at 1 mm spacing, not tens of minutes)."""

    patch_width: float = 25.0e-3
    patch_length: float = 21.0e-3
    substrate_height: float = 1.6e-3
    rel_permittivity: float = 2.2
    loss_tangent: float = 0.0009
    board_margin: float = 8.0e-3
    feed_fraction: float = 0.3
    reference_impedance: float = 50.0


def build_micro_patch(params: MicroPatchParams | None = None) -> AntennaDesign:
    p = params or MicroPatchParams()
    layout = PatchLayout((Rect2D(-p.patch_width / 2, 0.0, p.patch_width, p.patch_length, "add"),))
    extent = (p.patch_width + 2 * p.board_margin, p.patch_length + 2 * p.board_margin)
    substrate = Material("substrate", p.rel_permittivity, p.loss_tangent)
    stack = SubstrateStack(substrate, p.substrate_height, 0.1e-3, extent)
    port = PortSpec((0.0, p.feed_fraction * p.patch_length), "+y", p.reference_impedance)
    model = PatchModel(p.patch_width, p.patch_length, p.substrate_height, p.rel_permittivity)
    f0 = resonant_frequency(model)
    return AntennaDesign(stack, layout, port, analysis_band=(0.7 * f0, 1.3 * f0))


def microstrip_width_for_z0(z0: float, eps_r: float, h: float) -> float:
    """Wheeler synthesis of a microstrip trace width for a target impedance.

    Good to a few percent for 20..120 ohms; used to build ~50 ohm lines for
    port validation structures.
    """
    import math

    a = (z0 / 60.0) * math.sqrt((eps_r + 1) / 2) + ((eps_r - 1) / (eps_r + 1)) * (0.23 + 0.11 / eps_r)
    wh = 8.0 * math.exp(a) / (math.exp(2 * a) - 2.0)
    if wh < 2.0:
        return wh * h
    b = 377.0 * math.pi / (2.0 * z0 * math.sqrt(eps_r))
    wh = (2.0 / math.pi) * (
        b - 1.0 - math.log(2 * b - 1.0)
        + (eps_r - 1.0) / (2.0 * eps_r) * (math.log(b - 1.0) + 0.39 - 0.61 / eps_r)
    )
    return wh * h


def build_matched_line(
    eps_r: float = 2.2,
    h: float = 2.4e-3,
    length: float = 60.0e-3,
    z0: float = 50.0,
) -> AntennaDesign:
    """Center-fed microstrip line whose both ends run into the absorber.

    The port sees two z0 lines in parallel, so its reference impedance is
    z0/2 and the structure is a matched load: after the launch transient
    nothing comes back.  Substrate and ground fill the grid laterally.
    """
    w = microstrip_width_for_z0(z0, eps_r, h)
    half = length / 2 + 40.0e-3  # overhang pierces the absorber on both ends
    layout = PatchLayout((Rect2D(-w / 2, -half, w, 2 * half, "add"),))
    substrate = Material("substrate", eps_r, 0.0)
    stack = SubstrateStack(substrate, h, 0.1e-3, (w + 20e-3, length))
    port = PortSpec((0.0, 0.0), "+y", z0 / 2)
    return AntennaDesign(stack, layout, port, analysis_band=(2.0e9, 5.0e9),
                         substrate_fills_grid=True)


def build_open_stub(
    eps_r: float = 2.2,
    h: float = 2.4e-3,
    length: float = 30.0e-3,
    z0: float = 50.0,
) -> AntennaDesign:
    """Center-fed strip with both ends open a distance `length` from the
    port: the first reflection returns after ~2*length/v_phase."""
    w = microstrip_width_for_z0(z0, eps_r, h)
    layout = PatchLayout((Rect2D(-w / 2, -length, w, 2 * length, "add"),))
    substrate = Material("substrate", eps_r, 0.0)
    stack = SubstrateStack(substrate, h, 0.1e-3, (w + 24e-3, 2 * length + 24e-3))
    port = PortSpec((0.0, 0.0), "+y", z0 / 2)
    return AntennaDesign(stack, layout, port, analysis_band=(2.0e9, 5.0e9))


FIXTURES = {
    "simple_u": lambda: build_simple_u_patch(),
    "modified_u": lambda: build_modified_u_patch(),
    "oracle_patch": lambda: build_plain_patch(),
    "micro_patch": lambda: build_micro_patch(),
}

FIXTURE_PARAMS = {
    "simple_u": SimpleUParams,
    "modified_u": ModifiedUParams,
    "oracle_patch": PlainPatchParams,
    "micro_patch": MicroPatchParams,
}

FIXTURE_BUILDERS = {
    "simple_u": build_simple_u_patch,
    "modified_u": build_modified_u_patch,
    "oracle_patch": build_plain_patch,
    "micro_patch": build_micro_patch,
}
