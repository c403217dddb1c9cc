"""Gaussian-modulated sine excitation.

The sine modulation kills DC exactly; the envelope width is set from the
requested -20 dB bandwidth.  Construction enforces that the amplitude
spectrum at DC and at twice the carrier stays 60 dB below the peak, which
bounds both the static offset injected into the grid and the energy beyond
the resolvable band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Default carrier/bandwidth: centered on the 4-4.5 GHz analysis band, wide
# enough (-20 dB points near 1.85 / 6.65 GHz) that reflection spectra stay
# usable from 1 to 7 GHz, where the fundamental patch mode actually lives.
DEFAULT_F0 = 4.25e9
DEFAULT_BANDWIDTH = 4.8e9


@dataclass(frozen=True)
class SourceWaveform:
    kind: str = "gaussian_sine"
    f0: float = DEFAULT_F0
    bandwidth: float = DEFAULT_BANDWIDTH
    delay: float | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind != "gaussian_sine":
            raise ConfigError(f"unsupported waveform kind {self.kind!r}")
        if self.f0 <= 0 or self.bandwidth <= 0:
            raise ConfigError("waveform f0 and bandwidth must be positive")
        rel_dc = self.spectrum_rel(0.0)
        rel_2f0 = self.spectrum_rel(2.0 * self.f0)
        if max(rel_dc, rel_2f0) >= 1e-3:
            raise ConfigError(
                "waveform spectrum must stay 60 dB below peak at DC and 2*f0; "
                f"got {20 * math.log10(max(rel_dc, rel_2f0, 1e-300)):.1f} dB "
                f"(f0 = {self.f0:.3g}, bandwidth = {self.bandwidth:.3g})"
            )

    @property
    def tau(self) -> float:
        """Envelope 1/e half-width giving -20 dB at +-bandwidth/2."""
        return 2.0 * math.sqrt(math.log(10.0)) / (math.pi * self.bandwidth)

    @property
    def t0(self) -> float:
        return self.delay if self.delay is not None else 4.5 * self.tau

    @property
    def end_time(self) -> float:
        """After this the envelope is below ~2e-9 of peak."""
        return self.t0 + 4.5 * self.tau

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        arg = (t - self.t0) / self.tau
        out = self.amplitude * np.sin(2.0 * math.pi * self.f0 * (t - self.t0)) * np.exp(-arg * arg)
        return out if out.ndim else float(out)

    def spectrum_rel(self, f: float) -> float:
        """|V(f)| relative to the spectral peak (analytic, envelope pair)."""
        a = math.pi * self.tau
        pos = math.exp(-((a * (f - self.f0)) ** 2))
        neg = math.exp(-((a * (f + self.f0)) ** 2))
        return abs(pos - neg)

    def band_at(self, level_db: float) -> tuple[float, float]:
        """(f_lo, f_hi) where the spectrum crosses level_db below peak."""
        df = math.sqrt(-level_db / 20.0 * math.log(10.0)) / (math.pi * self.tau)
        return max(self.f0 - df, 0.0), self.f0 + df
