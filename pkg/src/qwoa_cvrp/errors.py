"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so modules should raise the
most specific class that applies.
"""


class ValidationError(ValueError):
    """An input violates a documented invariant (bad partition, bad instance, ...)."""


class PartitionError(ValidationError):
    """A collection of subsets is not a valid ordered set partition."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a configured size cap."""


class NormalizationError(ValidationError):
    """An amplitude vector drifted away from unit norm."""
