"""Grid selection, CFL, and material assignment."""

import math

import numpy as np
import pytest

from patchsim import (
    BudgetError,
    CoverageError,
    GeometryError,
    GridSpec,
    Material,
    PatchLayout,
    PortSpec,
    Rect2D,
    SubstrateStack,
    auto_grid,
    cfl_timestep,
)
from patchsim.constants import C0, EPS0
from patchsim.fixtures import build_modified_u_patch, build_simple_u_patch
from patchsim.geometry import AntennaDesign
from patchsim.grid import GridLimits, assign_materials, cfl_limit

MM = 1e-3


def make_spec(d=1e-3, n=8, courant=0.99):
    return GridSpec(d, d, d, n, n, n, courant * cfl_limit(d, d, d))


def small_design(eps_r=2.2, tan_d=0.0009, patch=(10.0, 8.0), margin=6.0, h=2.0):
    layout = PatchLayout((Rect2D(-patch[0] / 2 * MM, 0, patch[0] * MM, patch[1] * MM),))
    stack = SubstrateStack(Material("s", eps_r, tan_d), h * MM, 0.1 * MM,
                           ((patch[0] + 2 * margin) * MM, (patch[1] + 2 * margin) * MM))
    return AntennaDesign(stack, layout, PortSpec((0.0, 2 * MM)), analysis_band=(4.0e9, 4.5e9))


class TestCfl:
    def test_cubic_courant_one(self):
        d = 0.4e-3
        spec = make_spec(d)
        assert cfl_timestep(spec, 1.0) == pytest.approx(d / (C0 * math.sqrt(3)), rel=1e-12)

    def test_quarter_mm_cubic(self):
        spec = make_spec(0.25e-3)
        assert cfl_timestep(spec, 0.99) == pytest.approx(4.766e-13, rel=1e-3)

    def test_one_dimensional_limit(self):
        dx = 1e-3
        spec = GridSpec(dx, 1e25, 1e25, 4, 4, 4, 0.5 * dx / C0)
        assert cfl_timestep(spec, 0.5) == pytest.approx(0.5 * dx / C0, rel=1e-9)

    def test_courant_bounds(self):
        spec = make_spec()
        with pytest.raises(GeometryError):
            cfl_timestep(spec, 0.0)
        with pytest.raises(GeometryError):
            cfl_timestep(spec, 1.01)

    def test_gridspec_rejects_unstable_dt(self):
        d = 1e-3
        with pytest.raises(GeometryError):
            GridSpec(d, d, d, 8, 8, 8, 1.01 * cfl_limit(d, d, d))


class TestAutoGrid:
    def test_wavelength_rule_value(self):
        # c / (7 GHz sqrt(2.2)) / 20 = 1.44 mm
        lam = C0 / (7e9 * math.sqrt(2.2))
        assert lam == pytest.approx(28.87e-3, rel=1e-3)
        d = small_design(patch=(80.0, 80.0), margin=10.0)  # features >> wavelength rule
        spec = auto_grid(d, 20, 7e9, 2, limits=GridLimits(cell_budget=80_000_000))
        assert spec.dx == pytest.approx(lam / 20, rel=1e-12)

    def test_feature_rule_wins_for_modified_fixture(self):
        spec = auto_grid(build_modified_u_patch(), 20, 7e9, 2)
        assert spec.dx == pytest.approx(0.25e-3, rel=1e-12)  # 0.5 mm stub / 2

    def test_vacuum_coarse_wavelength(self):
        d = small_design(eps_r=1.0, tan_d=0.0, patch=(200.0, 200.0), margin=40.0)
        spec = auto_grid(d, 10, 3e9, 2, limits=GridLimits(cell_budget=20_000_000))
        assert spec.dx == pytest.approx(10e-3, rel=1e-3)

    def test_preconditions(self):
        d = small_design()
        with pytest.raises(GeometryError):
            auto_grid(d, 9, 7e9, 2)
        with pytest.raises(GeometryError):
            auto_grid(d, 20, 7e9, 0)

    def test_budget_error_names_dimension(self):
        d = build_simple_u_patch()
        with pytest.raises(BudgetError) as err:
            auto_grid(d, 20, 7e9, 2, dxy=0.1e-3)
        assert err.value.axis in ("nx", "ny", "nz")
        assert "ny" in str(err.value)

    def test_substrate_resolved_with_four_cells(self):
        spec = auto_grid(small_design(h=2.4), 20, 7e9, 2, dxy=0.5e-3)
        assert spec.dz == pytest.approx(0.6e-3, rel=1e-12)

    def test_air_margin_above_patch(self):
        d = small_design()
        spec = auto_grid(d, 20, 7e9, 2, dxy=0.5e-3)
        lam_min = C0 / (7e9 * math.sqrt(2.2))
        top_air = spec.origin[2] + spec.nz * spec.dz - d.stack.substrate_height - 10 * spec.dz
        assert top_air >= lam_min / 4 - 1e-9

    def test_dt_satisfies_cfl(self):
        spec = auto_grid(small_design(), 20, 7e9, 2, dxy=0.5e-3)
        assert spec.dt <= cfl_limit(spec.dx, spec.dy, spec.dz)


class TestAssignMaterials:
    def test_vacuum_design_coefficients(self):
        d = small_design(eps_r=1.0, tan_d=0.0)
        spec = auto_grid(d, 20, 7e9, 2, dxy=1e-3)
        mats = assign_materials(d, spec)
        for comp in ("ex", "ey", "ez"):
            ca, cb = mats.ca(comp), mats.cb(comp)
            pec = getattr(mats, f"pec_{comp}")
            assert np.all(ca[~pec] == 1.0)
            assert np.allclose(cb[~pec], spec.dt / EPS0, rtol=1e-12)
            assert np.all(ca[pec] == 0.0)
            assert np.all(cb[pec] == 0.0)

    def test_sigma_equivalent_value(self):
        from patchsim.grid import _sigma_equivalent

        sig = _sigma_equivalent(2.2, 0.0009, 4.25e9)
        assert sig == pytest.approx(4.68e-4, rel=1e-2)

    def test_substrate_coefficients(self):
        d = small_design()
        spec = auto_grid(d, 20, 7e9, 2, dxy=1e-3)
        mats = assign_materials(d, spec)
        k_mid = (mats.ground_plane_k + mats.patch_plane_k) // 2
        i, j = spec.nx // 2, spec.ny // 2
        # inside the substrate: eps recovered from the ca/cb identity
        eps = spec.dt * (1 + mats.ca_ex[i, j, k_mid]) / (2 * mats.cb_ex[i, j, k_mid])
        assert eps == pytest.approx(2.2 * EPS0, rel=1e-6)
        assert mats.ca_ex[i, j, k_mid] < 1.0  # lossy

    def test_interface_edges_are_averaged(self):
        d = small_design()
        spec = auto_grid(d, 20, 7e9, 2, dxy=1e-3)
        mats = assign_materials(d, spec)
        # on the substrate-air interface plane, inside the board but clear of
        # the patch conductor: the 4-cell average mixes substrate and air
        k_top = mats.patch_plane_k
        bx0, by0, bw, bd = d.board_rect()
        i = spec.node_index("x", bx0 + 2e-3)
        j = spec.node_index("y", by0 + 2e-3)
        assert not mats.pec_ex[i, j, k_top]
        eps = spec.dt * (1 + mats.ca_ex[i, j, k_top]) / (2 * mats.cb_ex[i, j, k_top])
        assert eps == pytest.approx(0.5 * (1 + 2.2) * EPS0, rel=1e-6)

    def test_pec_mask_matches_conductor_mask(self):
        from patchsim.geometry import conductor_mask

        d = build_simple_u_patch()
        spec = auto_grid(d, 20, 7e9, 2, dxy=0.5e-3)
        mats = assign_materials(d, spec)
        k = mats.patch_plane_k
        cells = d.layout.sample(spec.centers("x"), spec.centers("y"))
        ii, jj = np.nonzero(cells)
        # every conductor cell pins the two tangential components it owns
        assert np.all(mats.pec_ex[ii, jj, k])
        assert np.all(mats.pec_ex[ii, jj + 1, k])
        assert np.all(mats.pec_ey[ii, jj, k])
        assert np.all(mats.pec_ey[ii + 1, jj, k])
        # and the mask agrees with the geometry-module rasterization
        m = conductor_mask(d.layout, spec.dx)
        assert int(np.count_nonzero(cells)) == pytest.approx(
            int(np.count_nonzero(m.values)), rel=0.02)

    def test_ground_plane_spans_board(self):
        d = small_design()
        spec = auto_grid(d, 20, 7e9, 2, dxy=1e-3)
        mats = assign_materials(d, spec)
        k = mats.ground_plane_k
        bx0, by0, bw, bd = d.board_rect()
        i = spec.node_index("x", bx0 + bw / 2)
        j = spec.node_index("y", by0 + bd / 2)
        assert mats.pec_ex[i, j, k]
        assert not mats.pec_ex[2, 2, k]  # outside the board: no ground

    def test_idempotent_and_deterministic(self):
        d = small_design()
        spec = auto_grid(d, 20, 7e9, 2, dxy=1e-3)
        m1 = assign_materials(d, spec)
        m2 = assign_materials(d, spec)
        assert np.array_equal(m1.ca_ex, m2.ca_ex)
        assert np.array_equal(m1.cb_ez, m2.cb_ez)
        assert np.array_equal(m1.pec_ey, m2.pec_ey)

    def test_coverage_error(self):
        d = small_design()
        bad = GridSpec(1e-3, 1e-3, 0.5e-3, 10, 10, 10, 0.9 * cfl_limit(1e-3, 1e-3, 0.5e-3),
                       origin=(-5e-3, -5e-3, -1e-3))
        with pytest.raises(CoverageError):
            assign_materials(d, bad)
