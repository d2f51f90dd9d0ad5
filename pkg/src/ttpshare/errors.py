"""Exception types raised across the package."""


class TTPShareError(Exception):
    """Base class for all errors raised by ttpshare."""


class NotInvertible(TTPShareError, ValueError):
    pass


class SingularMatrix(TTPShareError, ValueError):
    pass


class NotPrime(TTPShareError, ValueError):
    pass


class ZeroSecret(TTPShareError, ValueError):
    pass


class InvalidEvaluationPoint(TTPShareError, ValueError):
    pass


class DuplicateEvaluationPoint(InvalidEvaluationPoint):
    pass


class WrongShareCount(TTPShareError, ValueError):
    pass


class ModulusTooSmall(TTPShareError, ValueError):
    pass


class MalformedBlock(TTPShareError, ValueError):
    pass


class ShareFormatError(TTPShareError, ValueError):
    pass


class BadExponent(TTPShareError, ValueError):
    pass


class TamperDetected(TTPShareError):
    """A piggy bank round failed its tag check."""

    def __init__(self, round_index: int, detail: str = ""):
        self.round_index = round_index
        msg = f"tamper detected in round {round_index}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class LengthMismatch(TTPShareError, ValueError):
    pass


class UnknownRecipient(TTPShareError, ValueError):
    pass


class IndexMismatch(TTPShareError, ValueError):
    pass


class EnumerationTooLarge(TTPShareError):
    pass


class ConfigError(TTPShareError, ValueError):
    pass


class NotNormalized(TTPShareError, ValueError):
    pass


class NotAnEncoding(TTPShareError, ValueError):
    pass
