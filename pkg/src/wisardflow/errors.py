"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for every error raised by wisardflow."""


class ConfigurationError(ToolkitError):
    """Invalid classifier configuration or experiment grid."""


class InputError(ToolkitError):
    """A runtime input violates an operation's contract (e.g. length mismatch)."""


class StateError(ToolkitError):
    """Operation attempted on a model in the wrong state (e.g. classify before train)."""


class FormatError(ToolkitError):
    """Malformed, truncated, or version-incompatible model file."""


class IngestionError(ToolkitError):
    """Bad event-log file. Carries the offending 1-based row number when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EncodingError(ToolkitError):
    """A trace cannot be encoded against the given catalog and geometry."""


class UnknownUnitError(EncodingError):
    """Trace references an organizational unit missing from the catalog."""


class TraceLengthError(EncodingError):
    """Trace does not fit the configured number of sequence positions."""


class SamplingError(ToolkitError):
    """Balanced sampling request cannot be satisfied by the available pools."""


class SpecError(ToolkitError):
    """Invalid synthetic-log specification."""
