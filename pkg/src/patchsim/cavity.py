"""Closed-form cavity / transmission-line model of rectangular patches.

Hammerstad-form effective permittivity and open-end length extension with
the half-wave resonance condition; used as the independent oracle for the
full-wave solver and for cross-checking design tables.  Pure functions,
no state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import C0
from .errors import GeometryError


@dataclass(frozen=True)
class PatchModel:
    """Rectangular patch: width W (non-resonant edge), length L (resonant),
    substrate height h, relative permittivity eps_r."""

    W: float
    L: float
    h: float
    eps_r: float

    def __post_init__(self):
        for name in ("W", "L", "h", "eps_r"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"PatchModel.{name} must be positive")

    @property
    def valid_range(self) -> bool:
        """Formulas assume a wide patch, W/h > 1."""
        return self.W / self.h > 1.0


def effective_permittivity(model: PatchModel) -> float:
    """Quasi-static effective permittivity of the equivalent wide microstrip.

    eps_eff = (eps_r + 1)/2 + (eps_r - 1)/2 * (1 + 12 h/W)^(-1/2)
    """
    if not model.valid_range:
        warnings.warn(
            f"W/h = {model.W / model.h:.3g} < 1: outside the validity range "
            "of the wide-patch formulas",
            stacklevel=2,
        )
    er = model.eps_r
    return (er + 1) / 2 + (er - 1) / 2 * (1 + 12 * model.h / model.W) ** -0.5


def length_extension(model: PatchModel, eps_eff: float | None = None) -> float:
    """Open-end fringing extension of the resonant length.

    dL = 0.412 h (eps_eff + 0.3)(W/h + 0.264) / ((eps_eff - 0.258)(W/h + 0.8))
    """
    if eps_eff is None:
        eps_eff = effective_permittivity(model)
    wh = model.W / model.h
    return 0.412 * model.h * (eps_eff + 0.3) * (wh + 0.264) / ((eps_eff - 0.258) * (wh + 0.8))


def resonant_frequency(model: PatchModel) -> float:
    """Fundamental (dominant-mode) resonance of the fringing-extended cavity:
    f10 = c / (2 (L + 2 dL) sqrt(eps_eff))."""
    eps_eff = effective_permittivity(model)
    dl = length_extension(model, eps_eff)
    return C0 / (2.0 * (model.L + 2.0 * dl) * math.sqrt(eps_eff))


def design_patch(f_target: float, eps_r: float, h: float) -> tuple[float, float]:
    """Synthesize (W, L) resonating at f_target on the given stack.

    W = c/(2 f) sqrt(2/(eps_r + 1));  L = c/(2 f sqrt(eps_eff(W))) - 2 dL.
    """
    if f_target <= 0:
        raise GeometryError("target frequency must be positive")
    w = C0 / (2.0 * f_target) * math.sqrt(2.0 / (eps_r + 1.0))
    model_w = PatchModel(w, w, h, eps_r)  # L placeholder; eps_eff depends on W only
    eps_eff = effective_permittivity(model_w)
    dl = length_extension(model_w, eps_eff)
    l = C0 / (2.0 * f_target * math.sqrt(eps_eff)) - 2.0 * dl
    if l <= 0:
        raise GeometryError(
            f"no physical patch length for f = {f_target:.4g} Hz on h = {h:.4g} m"
        )
    return w, l
