"""Exception types raised across the package."""


class ConrecError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(ConrecError, ValueError):
    pass


class DomainError(ConrecError, ValueError):
    """An argument lies outside the range where a formula is valid."""


class DimensionMismatchError(ConrecError, ValueError):
    pass


class RankDeficiencyError(ConrecError, ValueError):
    """Measurement directions do not span the ambient space."""


class UnboundedPolytopeError(ConrecError):
    """The error polytope is unbounded, so the worst-case error is infinite."""


class CapacityError(ConrecError):
    """Exact vertex enumeration would exceed the configured work cap."""


class NetConstructionError(ConrecError):
    pass


class ConfigError(ConrecError, ValueError):
    """Invalid sweep or CLI configuration.  ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
