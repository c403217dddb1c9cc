"""Cavity/transmission-line model: frozen values and structural properties."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchsim import (
    GeometryError,
    PatchModel,
    design_patch,
    effective_permittivity,
    length_extension,
    resonant_frequency,
)
from patchsim.constants import C0

TABLE_MODEL = PatchModel(47.43e-3, 39.098e-3, 2.4e-3, 2.2)


class TestEffectivePermittivity:
    def test_vacuum_is_identity(self):
        assert effective_permittivity(PatchModel(0.05, 0.04, 2.4e-3, 1.0)) == 1.0

    def test_published_stack_value(self):
        # (2.2+1)/2 + (2.2-1)/2 (1 + 12*2.4/47.43)^-1/2 = 2.0733
        assert effective_permittivity(TABLE_MODEL) == pytest.approx(2.0733, abs=2e-4)

    def test_parallel_plate_limit(self):
        wide = PatchModel(10.0, 1.0, 1e-4, 2.2)
        assert effective_permittivity(wide) == pytest.approx(2.2, rel=1e-3)

    def test_warns_outside_validity(self):
        with pytest.warns(UserWarning):
            effective_permittivity(PatchModel(1e-3, 1e-3, 2e-3, 2.2))

    @given(st.floats(1.0, 12.0), st.floats(1.5, 40.0))
    @settings(max_examples=80, deadline=None)
    def test_bounded_by_one_and_eps_r(self, er, w_over_h):
        h = 1.6e-3
        m = PatchModel(w_over_h * h, 0.03, h, er)
        eps = effective_permittivity(m)
        assert 1.0 <= eps <= er


class TestLengthExtension:
    def test_published_stack_value(self):
        assert length_extension(TABLE_MODEL) == pytest.approx(1.259e-3, abs=1e-6)

    def test_vanishes_with_height(self):
        thin = PatchModel(47.43e-3, 39.098e-3, 1e-7, 2.2)
        assert length_extension(thin) < 1e-7

    def test_scales_linearly_with_h_at_fixed_aspect(self):
        m1 = PatchModel(47.43e-3, 39.098e-3, 2.4e-3, 2.2)
        m2 = PatchModel(2 * 47.43e-3, 39.098e-3, 2 * 2.4e-3, 2.2)  # same W/h, eps_eff
        assert length_extension(m2) == pytest.approx(2 * length_extension(m1), rel=1e-12)


class TestResonantFrequency:
    def test_published_patch_lands_at_2p5_ghz(self):
        assert resonant_frequency(TABLE_MODEL) == pytest.approx(2.50e9, rel=2e-3)

    def test_air_half_wave(self):
        # eps_r = 1 with negligible fringing: f = c / (2 L)
        m = PatchModel(0.2, 30e-3, 1e-7, 1.0)
        assert resonant_frequency(m) == pytest.approx(C0 / 0.06, rel=1e-4)

    def test_doubling_effective_length_halves_frequency(self):
        m1 = TABLE_MODEL
        dl = length_extension(m1)
        m2 = PatchModel(m1.W, 2 * (m1.L + 2 * dl) - 2 * dl, m1.h, m1.eps_r)
        assert resonant_frequency(m2) == pytest.approx(resonant_frequency(m1) / 2, rel=1e-12)

    @given(st.floats(1.2e9, 7.5e9), st.sampled_from([1.0, 2.2, 4.4]),
           st.sampled_from([0.8e-3, 1.6e-3, 2.4e-3]))
    @settings(max_examples=60, deadline=None)
    def test_monotone_decreasing_in_length(self, f, er, h):
        w, l = design_patch(f, er, h)
        f1 = resonant_frequency(PatchModel(w, l, h, er))
        f2 = resonant_frequency(PatchModel(w, 1.1 * l, h, er))
        assert f2 < f1

    def test_monotone_decreasing_in_eps_r(self):
        lo = resonant_frequency(PatchModel(0.047, 0.039, 2.4e-3, 2.0))
        hi = resonant_frequency(PatchModel(0.047, 0.039, 2.4e-3, 3.0))
        assert hi < lo


class TestDesignPatch:
    def test_reproduces_published_table(self):
        w, l = design_patch(2.5e9, 2.2, 2.4e-3)
        assert w == pytest.approx(47.43e-3, rel=1e-3)
        assert l == pytest.approx(39.098e-3, rel=1e-3)

    def test_vacuum_width_is_half_wavelength(self):
        w, _ = design_patch(5e9, 1.0, 1.6e-3)
        assert w == pytest.approx(C0 / 1e10, rel=1e-12)

    def test_frequency_scaling(self):
        w1, l1 = design_patch(2.5e9, 2.2, 2.4e-3)
        w2, l2 = design_patch(5.0e9, 2.2, 2.4e-3)
        assert w2 == pytest.approx(w1 / 2, rel=1e-12)
        assert l2 == pytest.approx(l1 / 2, rel=0.05)  # dL correction breaks exact halving

    def test_round_trip_half_percent(self):
        for f in (1e9, 2.5e9, 4.25e9, 8e9):
            for er in (1.0, 2.2, 4.4):
                for h in (0.8e-3, 1.6e-3, 2.4e-3):
                    w, l = design_patch(f, er, h)
                    f_back = resonant_frequency(PatchModel(w, l, h, er))
                    assert abs(f_back - f) / f < 5e-3

    def test_rejects_impossible_targets(self):
        with pytest.raises(GeometryError):
            design_patch(-1e9, 2.2, 2.4e-3)
        with pytest.raises(GeometryError):
            design_patch(60e9, 2.2, 25e-3)  # fringing exceeds the half wavelength


class TestModelValidation:
    def test_positive_fields_required(self):
        for bad in (dict(W=0), dict(L=-1e-3), dict(h=0), dict(eps_r=0)):
            kwargs = dict(W=0.04, L=0.03, h=2e-3, eps_r=2.2)
            kwargs.update(bad)
            with pytest.raises(GeometryError):
                PatchModel(**kwargs)
