"""Port record to frequency domain: S11, return loss, resonances, bandwidth.

The transform is a direct DFT at the requested frequencies (dt-scaled, so a
unit impulse at t = 0 gives a flat spectrum of value dt).  Records are long
and only ~1200 frequencies are needed, so this beats padding to a
power-of-two length; a Goertzel-style running accumulation would give the
same numbers and is not needed at these sizes.

Sign convention: "return loss" here is 20 log10 |S11|, a value <= 0 dB for
anything passive, and the published "maximum return loss" of a design is
the deepest dip, reported as min_rl_db to keep the two readings apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandCoverageError, GeometryError, NoBandwidthError, TruncationError

RL_FLOOR_DB = -100.0           # clamp for |S11| = 0
INC_NOISE_FLOOR_REL = 1e-8     # incident-spectrum floor relative to its peak


@dataclass(frozen=True)
class TimeSignal:
    """Uniformly sampled real signal; decayed=False marks a truncated record."""

    values: np.ndarray
    dt: float
    t0: float = 0.0
    decayed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.dt <= 0:
            raise GeometryError("TimeSignal.dt must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)
        if f.ndim != 1 or v.shape != f.shape:
            raise GeometryError("Spectrum axes must be 1-D and aligned")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise GeometryError("Spectrum frequency axis must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise GeometryError("Spectrum values must be finite")


def dft(signal: TimeSignal, freqs, *, allow_truncated: bool = False) -> Spectrum:
    """X(f) = sum_n x_n exp(-2j pi f t_n) dt at the requested frequencies."""
    if not signal.decayed and not allow_truncated:
        raise TruncationError(
            "record has not decayed (termination was not 'energy converged'); "
            "pass allow_truncated=True to transform anyway"
        )
    freqs = np.asarray(freqs, dtype=float)
    t = signal.times
    # chunk over frequencies to bound the (F, N) phase matrix size
    out = np.empty(freqs.size, dtype=np.complex128)
    step = max(1, int(4e7 // max(len(t), 1)))
    for s in range(0, freqs.size, step):
        fs = freqs[s:s + step]
        out[s:s + step] = (np.exp(-2j * math.pi * fs[:, None] * t[None, :]) @ signal.values)
    return Spectrum(freqs, out * signal.dt)


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex S11 with its derived quantities."""

    s11: Spectrum
    band_used: tuple[float, float]
    reference_impedance: float = 50.0

    @property
    def frequencies(self) -> np.ndarray:
        return self.s11.frequencies

    def return_loss_db(self) -> np.ndarray:
        return return_loss_db(self.s11)

    def resonances(self, band: tuple[float, float] | None = None,
                   threshold_db: float = -10.0) -> list[tuple[float, float]]:
        return find_resonances(self.frequencies, self.return_loss_db(),
                               band or self.band_used, threshold_db)


def s11(port, freqs) -> FrequencyResponse:
    """S11(f) = DFT[v - v_inc] / DFT[v_inc] at the port reference plane.

    The incident wave is the Thevenin half of the source voltage, recorded
    during the run; a calibration-run cross-check lives in the harness.
    """
    freqs = np.asarray(freqs, dtype=float)
    sig_kw = dict(dt=port.dt, t0=port.dt, decayed=port.decayed)
    v_inc = dft(TimeSignal(port.v_inc, **sig_kw), freqs)
    v_ref = dft(TimeSignal(port.v - port.v_inc, **sig_kw), freqs)
    mag = np.abs(v_inc.values)
    floor = INC_NOISE_FLOOR_REL * float(np.max(mag)) if mag.size else 0.0
    bad = np.flatnonzero(mag <= floor)
    if bad.size:
        raise BandCoverageError(
            f"incident spectrum below the noise floor at {freqs[bad[0]]:.4g} Hz",
            frequency=float(freqs[bad[0]]),
        )
    vals = v_ref.values / v_inc.values
    return FrequencyResponse(
        Spectrum(freqs, vals),
        band_used=(float(freqs[0]), float(freqs[-1])),
        reference_impedance=port.reference_impedance,
    )


def return_loss_db(s11_spectrum: Spectrum) -> np.ndarray:
    """RL(f) = 20 log10 |S11(f)|, clamped at -100 dB for exact zeros."""
    mag = np.abs(s11_spectrum.values)
    floor = 10.0 ** (RL_FLOOR_DB / 20.0)
    return 20.0 * np.log10(np.maximum(mag, floor))


def find_resonances(freqs: np.ndarray, rl_db: np.ndarray,
                    band: tuple[float, float] | None = None,
                    threshold_db: float = -10.0) -> list[tuple[float, float]]:
    """Local minima of the return loss below threshold inside band, deepest
    first; dip position and depth refined by parabolic interpolation."""
    freqs = np.asarray(freqs, dtype=float)
    rl_db = np.asarray(rl_db, dtype=float)
    if band is None:
        band = (freqs[0], freqs[-1])
    out = []
    for i in range(1, freqs.size - 1):
        if not band[0] <= freqs[i] <= band[1]:
            continue
        if rl_db[i] < rl_db[i - 1] and rl_db[i] <= rl_db[i + 1] and rl_db[i] < threshold_db:
            y0, y1, y2 = rl_db[i - 1], rl_db[i], rl_db[i + 1]
            denom = y0 - 2.0 * y1 + y2
            if denom > 0:
                shift = 0.5 * (y0 - y2) / denom
                shift = float(np.clip(shift, -0.5, 0.5))
            else:
                shift = 0.0
            df = freqs[i + 1] - freqs[i] if shift >= 0 else freqs[i] - freqs[i - 1]
            f_res = freqs[i] + shift * df
            depth = y1 - 0.25 * (y0 - y2) * shift
            out.append((float(f_res), float(depth)))
    out.sort(key=lambda t: t[1])
    return out


def bandwidth(freqs: np.ndarray, rl_db: np.ndarray, f_res: float,
              threshold_db: float = -10.0) -> tuple[float, float]:
    """Widest contiguous interval around f_res with RL <= threshold; the
    crossings are linearly interpolated."""
    freqs = np.asarray(freqs, dtype=float)
    rl_db = np.asarray(rl_db, dtype=float)
    i = int(np.argmin(np.abs(freqs - f_res)))
    if rl_db[i] >= threshold_db:
        raise NoBandwidthError(
            f"return loss at {f_res:.4g} Hz is {rl_db[i]:.2f} dB, above the "
            f"{threshold_db:.2f} dB threshold"
        )
    lo = i
    while lo > 0 and rl_db[lo - 1] <= threshold_db:
        lo -= 1
    hi = i
    while hi < freqs.size - 1 and rl_db[hi + 1] <= threshold_db:
        hi += 1
    if lo > 0:
        f1 = float(np.interp(threshold_db, [rl_db[lo], rl_db[lo - 1]], [freqs[lo], freqs[lo - 1]]))
    else:
        f1 = float(freqs[0])
    if hi < freqs.size - 1:
        f2 = float(np.interp(threshold_db, [rl_db[hi], rl_db[hi + 1]], [freqs[hi], freqs[hi + 1]]))
    else:
        f2 = float(freqs[-1])
    return f1, f2


def accepted_power(resp: FrequencyResponse, port, f: float) -> float:
    """Incident minus reflected power at the port at frequency f (W, with
    the run's phasor normalization; ratios against far-field powers from
    the same run are physical)."""
    freqs = np.asarray([f], dtype=float)
    v_inc = dft(TimeSignal(port.v_inc, dt=port.dt, t0=port.dt, decayed=port.decayed), freqs,
                allow_truncated=True)
    idx = int(np.argmin(np.abs(resp.frequencies - f)))
    s = resp.s11.values[idx]
    p_inc = abs(v_inc.values[0]) ** 2 / (2.0 * resp.reference_impedance)
    return float(p_inc * (1.0 - abs(s) ** 2))


# ------------------------------------------------------------- file formats

def write_touchstone(path, resp_or_spectrum, z0: float | None = None) -> None:
    """One-port Touchstone v1: header '# HZ S RI R <z0>' then ascending
    'f Re Im' lines; fixed formatting so files are byte-stable."""
    if isinstance(resp_or_spectrum, FrequencyResponse):
        spectrum = resp_or_spectrum.s11
        z0 = resp_or_spectrum.reference_impedance if z0 is None else z0
    else:
        spectrum = resp_or_spectrum
        z0 = 50.0 if z0 is None else z0
    z0_txt = f"{z0:g}"
    lines = [f"# HZ S RI R {z0_txt}"]
    for f, v in zip(spectrum.frequencies, spectrum.values):
        lines.append(f"{f:.9e} {v.real:.12e} {v.imag:.12e}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_touchstone(path) -> tuple[Spectrum, float]:
    """Read back a one-port file written by write_touchstone."""
    freqs, vals = [], []
    z0 = 50.0
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("!"):
                continue
            if line.startswith("#"):
                parts = line.split()
                if "R" in parts:
                    z0 = float(parts[parts.index("R") + 1])
                if "RI" not in parts or "HZ" not in [p.upper() for p in parts]:
                    raise GeometryError(f"unsupported touchstone option line: {line}")
                continue
            f, re, im = (float(x) for x in line.split())
            freqs.append(f)
            vals.append(re + 1j * im)
    return Spectrum(np.array(freqs), np.array(vals)), z0


def write_rl_csv(path, freqs: np.ndarray, rl_db: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("f_hz,rl_db\n")
        for f, r in zip(freqs, rl_db):
            fh.write(f"{f:.9e},{r:.6f}\n")
