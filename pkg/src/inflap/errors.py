"""Exception hierarchy shared by all modules."""


class InflapError(Exception):
    """Base class for every error raised by this package."""


class LatticeError(InflapError, ValueError):
    pass


class BadSpacing(LatticeError):
    pass


class NonCommensurate(LatticeError):
    pass


class EmptyStencil(LatticeError):
    pass


class EmptyInterior(LatticeError):
    pass


class DimensionMismatch(InflapError, ValueError):
    pass


class OutsideInnerRegion(InflapError, IndexError):
    pass


class BadFamily(InflapError, ValueError):
    """A cone vertex was placed inside the test subdomain it is paired with."""


class BadRadii(InflapError, ValueError):
    pass


class HypothesisFailed(InflapError):
    """The sub/supersolution hypothesis of the discrete comparison check is violated.

    The conclusion is not evaluated in that case; ``result`` holds the
    hypothesis check with its witness.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class FormatError(InflapError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(InflapError, ValueError):
    """Invalid command-line or config-file input. ``key`` names the offender."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownKey(ConfigError):
    pass


class BadValue(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass
