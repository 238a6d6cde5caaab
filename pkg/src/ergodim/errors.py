"""Exception types raised by the toolkit.

Every failure mode that callers are expected to handle gets its own class so
that experiment drivers can distinguish "bad configuration" from "estimator
starved of data" without string matching.
"""

from __future__ import annotations

__all__ = [
    "ErgodimError",
    "WindowExhausted",
    "NonInvertible",
    "MixedSystems",
    "IncompatibleOracle",
    "UnsupportedOracle",
    "NoProbeAccepted",
    "ScaleUnderflow",
    "EmptySchedule",
    "ZeroMassAtom",
    "AtomBudgetExceeded",
    "SearchExhausted",
    "LengthMismatch",
    "EpsOutOfRange",
    "TooFewScales",
    "TooFewPoints",
    "MassStarvation",
    "EmptyCloud",
    "HitStarvation",
    "ConfigInvalid",
    "TaskFailed",
]


class ErgodimError(Exception):
    """Base class for all toolkit-specific errors."""


class WindowExhausted(ErgodimError):
    """A symbolic operation needed coordinates outside the stored window."""


class NonInvertible(ErgodimError):
    """The system is not invertible (e.g. |det A| != 1 for a toral map)."""


class MixedSystems(ErgodimError):
    """Points or systems of incompatible kinds were combined."""


class IncompatibleOracle(ErgodimError):
    """The measure oracle does not match the system it was paired with."""


class UnsupportedOracle(ErgodimError):
    """The requested operation is not defined for this oracle kind."""


class NoProbeAccepted(ErgodimError):
    """Rejection sampling found no admissible probe within the budget."""


class ScaleUnderflow(ErgodimError):
    """A requested scale fell below the metric's resolution floor."""


class EmptySchedule(ErgodimError):
    """A schedule (of times, scales, or radii) was empty."""


class ZeroMassAtom(ErgodimError):
    """A conditioning atom has measure zero, so no ratio is defined."""


class AtomBudgetExceeded(ErgodimError):
    """An exact enumeration would exceed the configured atom budget."""


class SearchExhausted(ErgodimError):
    """A bounded search (e.g. over translation times k) found no admissible value."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class LengthMismatch(ErgodimError):
    """Two words or coefficient lists that must align have different lengths."""


class EpsOutOfRange(ErgodimError):
    """The epsilon parameter is outside the admissible open interval."""


class TooFewScales(ErgodimError):
    """A regression over scales needs more scale points than were supplied."""


class TooFewPoints(ErgodimError):
    """A cloud or sample has too few points for the requested estimate."""


class MassStarvation(ErgodimError):
    """An empirical measure had zero hits at a requested scale."""


class EmptyCloud(ErgodimError):
    """A point cloud with no points was passed where data is required."""


class HitStarvation(ErgodimError):
    """No scale in the schedule reached the minimum reliable hit count."""


class ConfigInvalid(ErgodimError):
    """An experiment configuration failed validation."""


class TaskFailed(ErgodimError):
    """A harness task failed; the underlying error is chained as __cause__."""
