"""Exception hierarchy shared across the package.

Each error class maps to a stable CLI exit code (see ``cli.EXIT_CODES``).
"""

from __future__ import annotations


class PatchSimError(Exception):
    """Base class for all package errors."""


class ConfigError(PatchSimError):
    """Config file cannot be parsed or validated."""


class GeometryError(PatchSimError):
    """Inconsistent conductor layout (cuts outside patch, overlapping stubs...)."""


class BudgetError(PatchSimError):
    """Grid exceeds the configured cell budget."""

    def __init__(self, message: str, axis: str | None = None):
        super().__init__(message)
        self.axis = axis


class CoverageError(PatchSimError):
    """Grid does not cover the design volume."""


class PortPlacementError(PatchSimError):
    """Port does not sit on a conductor above the ground plane."""


class DivergenceError(PatchSimError):
    """Non-finite field value detected during time stepping."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class TruncationError(PatchSimError):
    """Spectral analysis requested on a record that has not decayed."""


class BandCoverageError(PatchSimError):
    """Incident spectrum below the noise floor at a requested frequency."""

    def __init__(self, message: str, frequency: float):
        super().__init__(message)
        self.frequency = frequency


class NoBandwidthError(PatchSimError):
    """Resonance dip is shallower than the bandwidth threshold."""


class MissingFrequencyError(PatchSimError):
    """Far-field transform requested at a frequency that was not recorded."""


class PowerAccountingError(PatchSimError):
    """Non-positive accepted power when normalizing gain."""
