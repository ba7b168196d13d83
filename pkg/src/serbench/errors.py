"""Exception taxonomy shared across the package.

DataError maps to CLI exit code 2, NumericError to exit code 3.
"""


class DataError(Exception):
    """Bad input data: files, manifests, configs, preconditions."""


class NumericError(Exception):
    """Runtime numeric failure: NaN loss, non-finite gradients."""
