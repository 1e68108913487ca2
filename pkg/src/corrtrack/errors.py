"""Exception types raised across the package."""


class CorrTrackError(Exception):
    """Base class for all package errors."""


class ContractViolation(CorrTrackError, ValueError):
    """An operation was called with arguments that break its preconditions."""


class ConfigError(CorrTrackError):
    """Invalid or inconsistent configuration."""


class FormatError(CorrTrackError):
    """Malformed dataset or result file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class TrackingError(CorrTrackError):
    """Localization could not be performed on a frame."""


class InitializationError(CorrTrackError):
    """The tracker could not be initialized from the given box."""
