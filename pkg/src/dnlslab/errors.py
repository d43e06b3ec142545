"""Exception types shared across the package."""


class DnlsLabError(Exception):
    """Base class for package errors."""


class ConfigError(DnlsLabError):
    """Invalid experiment configuration. CLI exit code 2."""


class NumericalError(DnlsLabError):
    """NaN/overflow or other numerical failure. CLI exit code 3."""


class MixingError(DnlsLabError):
    """Sampler mixing or effective-sample-size diagnostic failure. CLI exit code 4."""
