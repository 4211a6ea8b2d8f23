"""Exception hierarchy.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch one type.
"""


class LtpfError(ValueError):
    pass


class ConfigError(LtpfError):
    """Raised for any configuration problem (file syntax or invariants)."""


class BadDimension(ConfigError):
    pass


class NonPositivePhysical(ConfigError):
    pass


class BerOutOfRange(ConfigError):
    pass


class QoSLengthMismatch(ConfigError):
    pass


class NonPositiveDoppler(LtpfError):
    pass


class NegativeGain(LtpfError):
    pass


class BadBranchCount(LtpfError):
    pass


class NonPositiveSnr(LtpfError):
    pass


class BadWindow(LtpfError):
    pass


class InstanceTooLarge(LtpfError):
    pass


class LengthMismatch(LtpfError):
    pass


class NonPositiveRate(LtpfError):
    pass


class AllZero(LtpfError):
    pass


class EmptyInput(LtpfError):
    pass


class BadPartition(LtpfError):
    pass


class MissingSweepCell(LtpfError):
    pass
