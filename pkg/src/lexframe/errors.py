"""Exception hierarchy shared across the package.

The three concrete classes map onto the CLI exit codes: ConfigError -> 2,
DataError -> 3, BackendError -> 4. Programming errors (violated
preconditions) raise plain ValueError/TypeError as usual.
"""


class LexframeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(LexframeError):
    """Bad configuration: unknown keys, missing files, invalid values."""


class DataError(LexframeError):
    """Malformed or inconsistent input data (lexicons, corpora, pair files)."""


class BackendError(LexframeError):
    """A model backend failed to load or produced no usable output."""
