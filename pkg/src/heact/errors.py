"""Exception types shared across the package."""


class HeactError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(HeactError, ValueError):
    """A caller-supplied argument violates an operation's precondition."""


class NumericError(HeactError, ArithmeticError):
    """A numerical procedure failed (non-finite solve, rank deficiency, ...)."""


class ParseError(HeactError, ValueError):
    """Malformed input file.  Carries the offending line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class RangeError(HeactError):
    """Encoded values exceed the coefficient headroom of the current modulus."""


class AlignmentError(HeactError):
    """Ciphertext/plaintext operands disagree on level or scale."""


class LevelExhaustedError(HeactError):
    """A multiplication was requested but no modulus levels remain."""


class IncompatibleActivationError(HeactError):
    """An activation that cannot run under HE was requested in the encrypted path."""


class TrainingDivergedError(HeactError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch
