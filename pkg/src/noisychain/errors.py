"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
numeric failures exit 2.  Out-of-range data is a numeric failure from the
CLI's point of view but is caught per replicate by the bench harness.
"""


class NoisychainError(Exception):
    """Base class for package errors."""


class ConfigError(NoisychainError):
    """Invalid parameters, domains, or file contents."""


class NumericError(NoisychainError):
    """A computation left its validity envelope (division by a vanishing
    characteristic function, non-real inverse transform, singular accepted
    block, ...)."""


class OutOfRangeError(NumericError):
    """A data point fell outside the padded evaluation grid."""
