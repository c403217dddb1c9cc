"""Rectangle set algebra, rasterization and the published fixtures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchsim import (
    AntennaDesign,
    GeometryError,
    Material,
    PatchLayout,
    PortSpec,
    Rect2D,
    SubstrateStack,
    build_modified_u_patch,
    build_simple_u_patch,
    conductor_mask,
    layout_area,
    write_pgm,
)
from patchsim.fixtures import ModifiedUParams, SimpleUParams

MM = 1e-3


def rect(x0, y0, w, h, op="add"):
    return Rect2D(x0 * MM, y0 * MM, w * MM, h * MM, op)


class TestRect:
    def test_rejects_nonpositive_sides(self):
        with pytest.raises(GeometryError):
            Rect2D(0, 0, -1e-3, 1e-3)
        with pytest.raises(GeometryError):
            Rect2D(0, 0, 1e-3, 0.0)

    def test_rejects_bad_op(self):
        with pytest.raises(GeometryError):
            Rect2D(0, 0, 1e-3, 1e-3, "xor")

    def test_contains_half_open(self):
        r = rect(0, 0, 1, 1)
        assert r.contains(0.0, 0.0)
        assert not r.contains(1 * MM, 0.5 * MM)
        assert not r.contains(0.5 * MM, 1 * MM)


class TestLayoutArea:
    def test_empty_layout(self):
        assert layout_area(PatchLayout()) == 0.0

    def test_single_rectangle_product(self):
        layout = PatchLayout((rect(0, 0, 47.43, 39.098),))
        assert layout_area(layout) == pytest.approx(47.43 * 39.098 * MM * MM, rel=1e-12)

    def test_add_then_identical_cut_cancels(self):
        layout = PatchLayout((rect(0, 0, 10, 5), rect(0, 0, 10, 5, "cut")))
        assert layout_area(layout) == 0.0

    def test_cut_then_readd_refills(self):
        layout = PatchLayout((rect(0, 0, 10, 10), rect(2, 2, 4, 4, "cut"),
                              rect(0, 0, 10, 10)))
        assert layout_area(layout) == pytest.approx(100 * MM * MM, rel=1e-12)

    def test_overlapping_adds_do_not_double_count(self):
        layout = PatchLayout((rect(0, 0, 10, 10), rect(5, 0, 10, 10)))
        assert layout_area(layout) == pytest.approx(150 * MM * MM, rel=1e-12)

    @given(st.lists(
        st.tuples(
            st.integers(0, 12), st.integers(0, 12),
            st.integers(1, 8), st.integers(1, 8),
            st.booleans(),
        ),
        min_size=1, max_size=8,
    ))
    @settings(max_examples=60, deadline=None)
    def test_cut_never_increases_add_never_decreases(self, specs):
        rects = []
        area = 0.0
        for x0, y0, w, h, is_add in specs:
            rects.append(rect(x0, y0, w, h, "add" if is_add else "cut"))
            new_area = layout_area(PatchLayout(tuple(rects)))
            if is_add:
                assert new_area >= area - 1e-18
            else:
                assert new_area <= area + 1e-18
            area = new_area
        assert area >= 0.0


class TestConductorMask:
    def test_empty_layout_all_false(self):
        m = conductor_mask(PatchLayout(), 1e-3)
        assert m.values.size == 0

    def test_unit_square_quarter_resolution(self):
        # 1 mm x 1 mm rectangle at 0.25 mm: exactly 4 x 4 cell centers inside
        m = conductor_mask(PatchLayout((rect(0, 0, 1, 1),)), 0.25 * MM)
        assert int(np.count_nonzero(m.values)) == 16

    def test_simple_u_mask_area_within_1pct(self):
        d = build_simple_u_patch()
        m = conductor_mask(d.layout, 0.25 * MM)
        exact = layout_area(d.layout)
        assert abs(m.area() - exact) / exact < 0.01

    def test_under_resolved_flag(self):
        d = build_modified_u_patch()  # smallest feature 0.5 mm
        assert conductor_mask(d.layout, 0.3 * MM).under_resolved
        assert not conductor_mask(d.layout, 0.2 * MM).under_resolved

    def test_resolution_must_be_positive(self):
        with pytest.raises(GeometryError):
            conductor_mask(PatchLayout(), 0.0)

    def test_convergence_two_halvings(self):
        for d in (build_simple_u_patch(), build_modified_u_patch()):
            exact = layout_area(d.layout)
            errs = [abs(conductor_mask(d.layout, r).area() - exact) / exact
                    for r in (1 * MM, 0.5 * MM, 0.25 * MM, 0.125 * MM)]
            assert errs[2] < errs[0]
            assert errs[3] < errs[1]
            assert errs[3] < 5e-3


class TestFixtures:
    def test_simple_u_patch_width_rect(self):
        d = build_simple_u_patch()
        widths = [r.width for r in d.layout.rects if r.op == "add"]
        assert any(math.isclose(w, 47.43 * MM) for w in widths)

    def test_simple_u_substrate(self):
        d = build_simple_u_patch()
        assert d.stack.substrate.rel_permittivity == 2.2
        assert d.stack.substrate.loss_tangent == 0.0009
        assert d.stack.substrate_height == pytest.approx(2.4 * MM)
        assert d.stack.ground_thickness == pytest.approx(0.1 * MM)

    def test_simple_u_area_vs_pixel_oracle(self):
        # exact set algebra against a fine 0.05 mm pixel count
        d = build_simple_u_patch()
        exact = layout_area(d.layout)
        expected = (47.43 * 39.098 - 2 * (20 * 3) - 29 * 0.7 + 28.1 * 3) * MM * MM
        assert exact == pytest.approx(expected, rel=1e-12)
        pix = conductor_mask(d.layout, 0.05 * MM)
        assert abs(pix.area() - exact) / exact < 0.005

    def test_modified_u_stubs(self):
        p = ModifiedUParams()
        assert len(p.stub_widths) == 7
        assert p.stub_widths[3] == pytest.approx(2.0 * MM)  # S4 width
        assert p.stub_depth == pytest.approx(4.0 * MM)

    def test_modified_area_difference_is_stub_area(self):
        a_simple = layout_area(build_simple_u_patch().layout)
        a_mod = layout_area(build_modified_u_patch().layout)
        assert a_simple - a_mod == pytest.approx(33.2e-6, rel=1e-9)
        pix_s = conductor_mask(build_simple_u_patch().layout, 0.05 * MM).area()
        pix_m = conductor_mask(build_modified_u_patch().layout, 0.05 * MM).area()
        assert pix_s - pix_m == pytest.approx(33.2e-6, rel=0.02)

    def test_designs_differ_only_by_stubs(self):
        simple = build_simple_u_patch()
        modified = build_modified_u_patch()
        stub_rects = modified.layout.rects[len(simple.layout.rects):]
        assert len(stub_rects) == 7
        assert all(r.op == "cut" for r in stub_rects)
        x = np.linspace(-30 * MM, 30 * MM, 601)
        y = np.linspace(-30 * MM, 45 * MM, 751)
        m_simple = simple.layout.sample(x, y)
        m_mod = modified.layout.sample(x, y)
        diff = m_simple & ~m_mod
        stubs_only = PatchLayout(tuple(
            Rect2D(r.x0, r.y0, r.width, r.height, "add") for r in stub_rects))
        assert np.array_equal(diff, m_simple & stubs_only.sample(x, y))
        assert not np.any(~m_simple & m_mod)

    def test_cut_outside_patch_rejected(self):
        with pytest.raises(GeometryError):
            build_simple_u_patch(SimpleUParams(slot_offset=30.0 * MM))

    def test_overwide_stubs_rejected(self):
        # 7 x 7 mm exceeds the 47.43 mm edge: no gap layout exists
        with pytest.raises(GeometryError):
            build_modified_u_patch(ModifiedUParams(
                stub_widths=(7.0 * MM,) * 7, stub_depth=4.0 * MM))

    def test_stub_slot_overlap_rejected(self):
        # deep stubs reach down into the U slot
        with pytest.raises(GeometryError):
            build_modified_u_patch(ModifiedUParams(stub_depth=25.0 * MM))

    def test_wrong_stub_count_rejected(self):
        with pytest.raises(GeometryError):
            ModifiedUParams(stub_widths=(1 * MM,) * 6)

    def test_port_on_feed_line(self):
        d = build_simple_u_patch()
        assert d.layout.contains(*d.port.position)
        assert d.port.position[1] == pytest.approx(-27.6 * MM)

    def test_board_margin(self):
        d = build_simple_u_patch()
        x0, y0, w, h = d.board_rect()
        bbox = d.layout.bounding_box()
        assert bbox[0] - x0 == pytest.approx(20 * MM)
        assert bbox[1] - y0 == pytest.approx(20 * MM)


class TestDesignValidation:
    def test_band_ordering(self):
        d = build_simple_u_patch()
        with pytest.raises(GeometryError):
            AntennaDesign(d.stack, d.layout, d.port, analysis_band=(5e9, 4e9))

    def test_port_off_conductor_rejected(self):
        d = build_simple_u_patch()
        with pytest.raises(GeometryError):
            AntennaDesign(d.stack, d.layout, PortSpec((0.0, -35.0 * MM)))

    def test_board_must_contain_layout(self):
        d = build_simple_u_patch()
        small = SubstrateStack(d.stack.substrate, d.stack.substrate_height,
                               d.stack.ground_thickness, (30 * MM, 30 * MM))
        with pytest.raises(GeometryError):
            AntennaDesign(small, d.layout, d.port)

    def test_material_invariants(self):
        with pytest.raises(GeometryError):
            Material("bad", rel_permittivity=0.5)
        with pytest.raises(GeometryError):
            Material("bad", loss_tangent=-1e-4)
        Material("pec", rel_permittivity=0.0, is_conductor=True)  # conductors exempt

    def test_stock_materials(self):
        from patchsim.geometry import COPPER, RT_DUROID_5880

        assert RT_DUROID_5880.rel_permittivity == 2.2
        assert RT_DUROID_5880.loss_tangent == 0.0009
        assert not RT_DUROID_5880.is_conductor
        assert COPPER.is_conductor

    def test_port_spec_invariants(self):
        with pytest.raises(GeometryError):
            PortSpec((0, 0), reference_impedance=0.0)
        with pytest.raises(GeometryError):
            PortSpec((0, 0), axis="up")


class TestPgm:
    def test_pgm_bytes(self, tmp_path):
        m = conductor_mask(PatchLayout((rect(0, 0, 1, 0.5),)), 0.25 * MM)
        path = tmp_path / "mask.pgm"
        write_pgm(m, path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n4 2\n255\n")
        assert data[len(b"P5\n4 2\n255\n"):] == b"\xff" * 8
