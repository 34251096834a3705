"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value (grouping factor, bit depth, lane count...)."""


class InvalidModeError(ValueError):
    pass


class CoverageError(IndexError):
    """A reference array or adder graph does not cover what was asked of it."""


class HdlParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantViolation(AssertionError):
    """Internal self-check failed; maps to CLI exit code 2."""


class InputError(ValueError):
    """Malformed user input such as an unreadable image; maps to CLI exit code 1."""
