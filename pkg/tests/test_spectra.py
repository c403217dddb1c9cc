"""DFT, S11, resonance finding, bandwidth and file formats."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchsim import (
    BandCoverageError,
    NoBandwidthError,
    PortRecord,
    Spectrum,
    TimeSignal,
    TruncationError,
    bandwidth,
    dft,
    find_resonances,
    return_loss_db,
    s11,
)
from patchsim.spectra import read_touchstone, write_rl_csv, write_touchstone


def gaussian_pulse(n=4000, dt=1e-12, f0=4e9, tau=0.15e-9, t0=0.8e-9):
    t = dt * (1 + np.arange(n))
    return t, np.sin(2 * np.pi * f0 * (t - t0)) * np.exp(-(((t - t0) / tau) ** 2))


def make_port(v, v_inc, dt=1e-12, decayed=True, r=50.0):
    return PortRecord(dt, np.asarray(v), np.zeros_like(v), np.asarray(v_inc),
                      reference_impedance=r, decayed=decayed)


class TestDft:
    def test_zero_record(self):
        sig = TimeSignal(np.zeros(100), 1e-12)
        out = dft(sig, [1e9, 2e9])
        assert np.all(out.values == 0)

    def test_unit_impulse_flat_dt(self):
        dt = 2e-12
        x = np.zeros(64)
        x[0] = 1.0
        out = dft(TimeSignal(x, dt, t0=0.0), np.linspace(0, 5e9, 11))
        assert np.allclose(out.values, dt, rtol=0, atol=1e-25)

    def test_sinusoid_integer_periods_is_concentrated(self):
        n, dt = 1000, 1e-12
        k = 50
        fk = k / (n * dt)
        t = dt * np.arange(n)
        sig = TimeSignal(np.sin(2 * np.pi * fk * t), dt, t0=0.0)
        grid = np.arange(1, n // 2) / (n * dt)
        out = dft(sig, grid)
        mag = np.abs(out.values)
        peak = mag[k - 1]
        others = np.delete(mag, k - 1)
        assert peak == pytest.approx(0.5 * n * dt, rel=1e-9)
        assert others.max() < peak * 1e-3  # below -60 dB

    @given(st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, a, b):
        rng = np.random.default_rng(3)
        x = rng.normal(size=256)
        y = rng.normal(size=256)
        freqs = np.linspace(1e8, 5e9, 17)
        dt = 1e-12
        fx = dft(TimeSignal(x, dt), freqs).values
        fy = dft(TimeSignal(y, dt), freqs).values
        fxy = dft(TimeSignal(a * x + b * y, dt), freqs).values
        assert np.allclose(fxy, a * fx + b * fy, rtol=1e-9, atol=1e-18)

    def test_parseval_on_white_noise(self):
        rng = np.random.default_rng(12)
        n, dt = 2048, 1e-12
        x = rng.normal(size=n)
        sig = TimeSignal(x, dt, t0=0.0)
        freqs = np.arange(n // 2 + 1) / (n * dt)
        vals = dft(sig, freqs).values
        df = 1.0 / (n * dt)
        spectral = (2 * np.sum(np.abs(vals) ** 2) - np.abs(vals[0]) ** 2
                    - np.abs(vals[-1]) ** 2) * df
        time_power = np.sum(x ** 2) * dt
        assert spectral == pytest.approx(time_power, rel=1e-9)

    def test_truncated_record_refused(self):
        sig = TimeSignal(np.ones(10), 1e-12, decayed=False)
        with pytest.raises(TruncationError):
            dft(sig, [1e9])
        dft(sig, [1e9], allow_truncated=True)


class TestS11:
    def test_matched_load(self):
        t, pulse = gaussian_pulse()
        resp = s11(make_port(pulse, pulse), np.linspace(2e9, 6e9, 41))
        assert np.max(resp.return_loss_db()) < -40.0

    def test_open_circuit(self):
        t, pulse = gaussian_pulse()
        resp = s11(make_port(2 * pulse, pulse), np.linspace(2e9, 6e9, 41))
        assert np.allclose(resp.s11.values, 1.0, atol=1e-9)

    def test_short_circuit(self):
        t, pulse = gaussian_pulse()
        resp = s11(make_port(np.zeros_like(pulse), pulse), np.linspace(2e9, 6e9, 41))
        assert np.allclose(resp.s11.values, -1.0, atol=1e-9)

    def test_band_coverage_error_names_frequency(self):
        # narrowband pulse, fully settled inside the record: far-out
        # frequencies sit below the noise floor
        t, pulse = gaussian_pulse(n=8000, f0=4e9, tau=0.5e-9, t0=2.5e-9)
        with pytest.raises(BandCoverageError) as err:
            s11(make_port(pulse, pulse), np.array([4.0e9, 25.0e9]))
        assert err.value.frequency == pytest.approx(25.0e9)

    def test_truncated_port_refused(self):
        t, pulse = gaussian_pulse()
        with pytest.raises(TruncationError):
            s11(make_port(pulse, pulse, decayed=False), np.array([4e9]))


class TestReturnLoss:
    def test_full_reflection_zero_db(self):
        s = Spectrum(np.array([1e9]), np.array([1.0 + 0j]))
        assert return_loss_db(s)[0] == pytest.approx(0.0, abs=1e-12)

    def test_published_depths(self):
        s = Spectrum(np.array([1e9, 2e9]), np.array([0.00708, 0.0126]))
        rl = return_loss_db(s)
        assert rl[0] == pytest.approx(-43.0, abs=0.05)
        assert rl[1] == pytest.approx(-38.0, abs=0.05)

    def test_zero_clamps_at_floor(self):
        s = Spectrum(np.array([1e9]), np.array([0.0 + 0j]))
        assert return_loss_db(s)[0] == pytest.approx(-100.0)

    def test_passive_values_nonpositive(self):
        s = Spectrum(np.array([1e9, 2e9, 3e9]), np.array([0.1, 0.99, 1.0]))
        assert np.all(return_loss_db(s) <= 0.0)


def synthetic_dip(f_res=4.2e9, depth_db=-25.0, q=40.0):
    freqs = np.arange(1e9, 7e9, 5e6)
    # single-pole reflection: |S11| dips to the target depth at f_res
    gamma_min = 10 ** (depth_db / 20)
    x = 2 * q * (freqs - f_res) / f_res
    s = (gamma_min + 1j * x) / (1 + 1j * x)
    return freqs, 20 * np.log10(np.abs(s))


class TestResonances:
    def test_flat_shallow_gives_empty(self):
        freqs = np.arange(1e9, 7e9, 5e6)
        assert find_resonances(freqs, np.full_like(freqs, -3.0)) == []

    def test_single_dip_located(self):
        freqs, rl = synthetic_dip(4.2e9, -25.0)
        res = find_resonances(freqs, rl)
        assert len(res) == 1
        f, depth = res[0]
        assert f == pytest.approx(4.2e9, abs=5e6)
        assert depth == pytest.approx(-25.0, abs=0.5)

    def test_two_dips_ordered_by_depth(self):
        f1, rl1 = synthetic_dip(4.1e9, -15.0)
        f2, rl2 = synthetic_dip(4.4e9, -30.0)
        rl = np.minimum(rl1, rl2)
        res = find_resonances(f1, rl)
        assert len(res) == 2
        assert res[0][0] == pytest.approx(4.4e9, abs=5e6)
        assert res[0][1] < res[1][1]
        assert res[1][0] == pytest.approx(4.1e9, abs=5e6)

    def test_band_restriction(self):
        freqs, rl = synthetic_dip(4.2e9, -25.0)
        assert find_resonances(freqs, rl, band=(5e9, 6e9)) == []

    def test_parabolic_interpolation_beats_grid(self):
        # dip centered off the grid: refined location lands within a fifth of a bin
        freqs, rl = synthetic_dip(4.2021e9, -20.0)
        res = find_resonances(freqs, rl)
        assert res[0][0] == pytest.approx(4.2021e9, abs=1e6)


class TestBandwidth:
    def test_symmetric_crossings(self):
        freqs, rl = synthetic_dip(4.25e9, -25.0, q=21.25)
        f1, f2 = bandwidth(freqs, rl, 4.25e9)
        assert f1 < 4.25e9 < f2
        mid = 0.5 * (f1 + f2)
        assert mid == pytest.approx(4.25e9, rel=2e-3)
        rl_at = np.interp([f1, f2], freqs, rl)
        assert np.allclose(rl_at, -10.0, atol=0.05)

    def test_shallow_dip_raises(self):
        freqs = np.arange(1e9, 7e9, 5e6)
        with pytest.raises(NoBandwidthError):
            bandwidth(freqs, np.full_like(freqs, -9.0), 4e9)

    def test_threshold_nesting(self):
        freqs, rl = synthetic_dip(4.25e9, -25.0)
        f1a, f2a = bandwidth(freqs, rl, 4.25e9, threshold_db=-10.0)
        f1b, f2b = bandwidth(freqs, rl, 4.25e9, threshold_db=-3.0)
        assert f1b < f1a and f2a < f2b


class TestTouchstone:
    def test_golden_file(self, tmp_path):
        import pathlib

        golden = pathlib.Path(__file__).parent / "data" / "golden.s1p"
        s = Spectrum(np.array([1e9, 2e9, 3e9]),
                     np.array([0.5 + 0j, -0.25 + 0.1j, 1e-4 - 1e-5j]))
        out = tmp_path / "synth.s1p"
        write_touchstone(out, s, 50.0)
        assert out.read_bytes() == golden.read_bytes()

    def test_round_trip(self, tmp_path):
        s = Spectrum(np.array([1e9, 2.5e9, 4e9]),
                     np.array([0.3 - 0.2j, -0.01 + 0.99j, 0.0 + 0j]))
        p = tmp_path / "rt.s1p"
        write_touchstone(p, s, 75.0)
        back, z0 = read_touchstone(p)
        assert z0 == 75.0
        assert np.allclose(back.frequencies, s.frequencies, rtol=1e-9)
        assert np.allclose(back.values, s.values, rtol=1e-9, atol=1e-15)

    def test_header_line(self, tmp_path):
        s = Spectrum(np.array([1e9]), np.array([0.5 + 0j]))
        p = tmp_path / "h.s1p"
        write_touchstone(p, s)
        assert p.read_text().splitlines()[0] == "# HZ S RI R 50"

    def test_rl_csv(self, tmp_path):
        p = tmp_path / "rl.csv"
        write_rl_csv(p, np.array([1e9, 2e9]), np.array([-3.5, -12.25]))
        lines = p.read_text().splitlines()
        assert lines[0] == "f_hz,rl_db"
        assert lines[1].startswith("1.000000000e+09,-3.5")


class TestSpectrumValidation:
    def test_axis_must_increase(self):
        from patchsim import GeometryError

        with pytest.raises(GeometryError):
            Spectrum(np.array([2e9, 1e9]), np.array([0j, 0j]))

    def test_values_must_be_finite(self):
        from patchsim import GeometryError

        with pytest.raises(GeometryError):
            Spectrum(np.array([1e9, 2e9]), np.array([0j, complex("nan")]))
