"""Shared exception types for persisted-artifact validation."""


class VersionSkewError(ValueError):
    """A persisted artifact carries an unsupported format version."""
