"""Exception hierarchy shared by the engine and the CLI."""


class SullivanError(Exception):
    """Base class for all engine errors."""


class DomainMismatchError(SullivanError):
    """Two objects live over different generator sets."""


class ModelError(SullivanError):
    """A model violates a structural axiom (degrees, d^2 = 0, ...)."""


class PreconditionError(SullivanError):
    """A computation was refused because its input does not meet its contract."""


class SplittingError(SullivanError):
    """A change of basis did not produce a split differential."""


class ParseError(SullivanError):
    """Positioned syntax or semantic error in a model file."""

    def __init__(self, message, line, column, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)
