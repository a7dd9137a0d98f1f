"""Exception hierarchy for decohere.

Each class also derives from the builtin a caller would naturally catch,
so ``except ValueError`` keeps working for configuration problems.
"""


class DecohereError(Exception):
    """Root of all decohere errors."""

    exit_code = 1


class ConfigurationError(DecohereError, ValueError):
    """A parameter violates one of its documented invariants."""

    exit_code = 2


class InsufficientDataError(ConfigurationError):
    """Too few samples for the requested estimate."""


class ContractViolationError(DecohereError, RuntimeError):
    """A user-supplied callable broke an engine contract."""


class AudioIOError(DecohereError, OSError):
    """Audio or report file could not be read or written."""

    exit_code = 3


class DivergenceError(DecohereError, ArithmeticError):
    """Adaptive filtering diverged or produced non-finite samples."""

    exit_code = 4


class SchemaError(ConfigurationError):
    """A configuration document failed validation.

    ``errors`` lists every violation as ``"<dotted.path>: <message>"``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("Invalid configuration:\n  " + "\n  ".join(self.errors))
