"""Exception types shared across the package."""


class PPBootError(Exception):
    """Base class for failures raised by this package."""


class DataError(PPBootError):
    """Input data violates the expected schema, format, or invariants."""


class SchemaError(DataError):
    """A required column or schema key is missing or malformed."""


class ParseError(DataError):
    """A cell could not be parsed; the message names the row and column."""


class ValidationError(DataError):
    """Parsed data violates a dataset invariant (NaN/infinity, bad shape)."""


class EstimationError(PPBootError):
    """An estimate, tuning run, training run, or interval cannot be produced."""
