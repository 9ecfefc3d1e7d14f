"""Exception hierarchy shared by the library and the command line."""


class CausalBellError(Exception):
    """Base class for all errors raised by causalbell."""


class ScenarioMismatchError(CausalBellError, ValueError):
    """Objects built for different scenarios were combined."""


class SignalingError(CausalBellError, ValueError):
    """An operation that needs a nonsignaling behavior received a signaling one."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class GuardLimitError(CausalBellError):
    """A configurable size guard (columns, strategies, parties) was exceeded."""


class ParseError(CausalBellError, ValueError):
    """Malformed text or file input.

    ``position`` is a human readable location: ``line 3, column 7`` for
    syntax errors or a field path such as ``boxes[2].probabilities[5]``.
    """

    def __init__(self, message, position=None):
        if position:
            message = f"{position}: {message}"
        super().__init__(message)
        self.position = position
