"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class RideSimError(Exception):
    """Base class for all engine errors."""


# --- wire protocol ---

class MalformedFrame(RideSimError):
    """Frame is not one parseable message object."""


class SchemaViolation(RideSimError):
    """Message parsed but violates the field schema (missing, extra, out of range)."""


class UnknownKind(RideSimError):
    """Message kind is not part of the protocol."""


# --- calibration ---

class InsufficientSamples(RideSimError):
    """Not enough samples to close a capture phase."""


class InvalidBounds(RideSimError):
    """Normalization bounds are degenerate (max <= baseline)."""


# --- fusion ---

class DegenerateInput(RideSimError):
    """Sensor sample cannot produce an orientation (e.g. free-fall accel)."""


# --- mapping / session ---

class NoVehicleSelected(RideSimError):
    """A controller was requested but no vehicle is active."""


class CommandRejected(RideSimError):
    """Command message refused in the current session state."""


# --- scenario ---

class UnknownRoute(RideSimError):
    """Route id outside the built-in set."""


# --- telemetry ---

class OrderingViolation(RideSimError):
    """Log append would break the record ordering invariant."""


class CorruptLog(RideSimError):
    """Log file cannot be parsed."""


class VersionMismatch(RideSimError):
    """Log was produced by an incompatible engine or configuration."""


# --- configuration / transport ---

class ConfigError(RideSimError):
    """Invalid configuration value or file."""


class BindFailure(RideSimError):
    """Listen endpoint could not be bound."""
