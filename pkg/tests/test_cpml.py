"""Absorber parameters, quasi-1D absorption, and the coefficient profiles."""

import numpy as np
import pytest

from patchsim import CpmlParams, GeometryError, SourceWaveform, Stepper
from patchsim.cpml import axis_coefficients, build_cpml
from patchsim.grid import GridSpec, cfl_limit, uniform_material_grid
from patchsim.validation import _quasi_1d_spec


class TestParams:
    def test_defaults(self):
        p = CpmlParams()
        assert p.thickness == 10
        assert p.polynomial_order == 3.0
        assert p.kappa_max == 5.0

    def test_thickness_floor(self):
        with pytest.raises(GeometryError):
            CpmlParams(thickness=4)

    def test_positive_parameters(self):
        for bad in (dict(polynomial_order=0), dict(sigma_max_ratio=-1),
                    dict(kappa_max=0), dict(alpha_max=0)):
            with pytest.raises(GeometryError):
                CpmlParams(**bad)

    def test_grid_must_fit_absorber(self):
        d = 1e-3
        spec = GridSpec(d, d, d, 12, 12, 12, 0.9 * cfl_limit(d, d, d))
        with pytest.raises(GeometryError, match="too small"):
            build_cpml(spec, CpmlParams(thickness=10))


class TestProfiles:
    def test_interior_is_neutral(self):
        ax = axis_coefficients(60, 1e-3, 1e-12, CpmlParams())
        assert np.all(ax.inv_kappa_e[15:46] == 1.0)
        assert np.all(ax.b_e[15:46] == 1.0)
        assert np.all(ax.a_e[15:46] == 0.0)

    def test_grading_toward_wall(self):
        ax = axis_coefficients(60, 1e-3, 1e-12, CpmlParams())
        # kappa grows toward the outer wall, so 1/kappa falls
        assert ax.inv_kappa_e[1] < ax.inv_kappa_e[5] < ax.inv_kappa_e[9] <= 1.0
        assert ax.inv_kappa_e[1] == pytest.approx(
            ax.inv_kappa_e[-2], rel=1e-12)  # symmetric sides

    def test_psi_buffers_cover_both_slabs(self):
        d = 1e-3
        spec = GridSpec(d, d, d, 30, 30, 30, 0.9 * cfl_limit(d, d, d))
        state = build_cpml(spec, CpmlParams(thickness=8))
        psi = state.psi[("ex", "y")]
        assert psi.shape == (30, 16, 31)
        assert len(state.psi) == 12


class TestAbsorption:
    def test_quasi_1d_pulse_absorbed(self):
        # pulse launched down a line vanishes into the z absorber
        nz = 260
        spec = _quasi_1d_spec(nz, 1e-3)
        st = Stepper(spec, uniform_material_grid(spec),
                     boundaries=("mirror", "mirror", "cpml"))
        wf = SourceWaveform(f0=5e9, bandwidth=5.5e9)
        peak = 0.0
        for n in range(1400):
            t = (st.fields.step + 0.5) * spec.dt
            st.fields.ex[:, :, 40] += st.fields.ex.dtype.type(wf(t))
            st.step()
            peak = max(peak, abs(float(st.fields.ex[0, 1, 130])))
        resid = float(np.max(np.abs(st.fields.ex[:, :, 20:-20])))
        assert peak > 0
        assert resid / peak < 3e-4  # about -70 dB after the pulse leaves
