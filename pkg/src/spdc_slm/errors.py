"""Exception hierarchy shared by all modules."""


class SpdcError(Exception):
    """Base class for all package errors."""


class DomainError(SpdcError, ValueError):
    """Input outside the physical or tabulated domain of an operation."""


class NoConeError(DomainError):
    """No phase-matched emission cone inside the search bracket."""


class ContractError(SpdcError, ValueError):
    """Energy or transverse-momentum conservation violated by the caller."""


class CalibrationError(SpdcError, ValueError):
    """Gray-to-phase calibration points are unusable."""


class CoverageError(SpdcError, ValueError):
    """The SLM panel does not receive light where it is required."""


class ConfigError(SpdcError, ValueError):
    """Invalid experiment or materials configuration."""


__all__ = [
    "CalibrationError",
    "ConfigError",
    "ContractError",
    "CoverageError",
    "DomainError",
    "NoConeError",
    "SpdcError",
]
