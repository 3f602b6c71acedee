"""Semantic exception hierarchy shared across the toolkit."""


class SeqHTError(Exception):
    """Base error for this package."""


class InvalidDistribution(SeqHTError, ValueError):
    """Probability vector/matrix violates its contract (negativity, bad sum, bad shape)."""


class AlphabetMismatch(SeqHTError, ValueError):
    """Operands are defined over different alphabets."""


class UnsupportedMass(SeqHTError, ValueError):
    """p places mass on a cell where q is zero (divergence or weight undefined)."""


class LengthMismatch(SeqHTError, ValueError):
    """Observed sequences are empty or of unequal length."""


class BadLength(SeqHTError, ValueError):
    """Sequence length incompatible with the protocol's block structure."""


class InconsistentMessages(SeqHTError, ValueError):
    """Message list does not match the configured encoder or step count."""


class NotStrictlyPositive(SeqHTError, ValueError):
    """The alternative-hypothesis joint has a zero cell; the exponent is undefined here."""


class UnsupportedAlphabetSize(SeqHTError, ValueError):
    """Operation only implemented for the stated alphabet sizes."""


class TooLarge(SeqHTError, ValueError):
    """Exact enumeration would exceed the configured cell budget."""


class HorizonTooLarge(SeqHTError, ValueError):
    """Requested enumeration horizon exceeds the exact-verification limit."""


class InvalidConfig(SeqHTError, ValueError):
    """Experiment configuration failed validation before execution."""
