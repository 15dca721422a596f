"""Exception hierarchy shared across the package."""


class GacryptError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(GacryptError):
    """Operand shapes are incompatible."""


class FieldMismatch(GacryptError):
    """Operands live over different prime fields."""


class Singular(GacryptError):
    """Matrix is not invertible."""


class NotAlternating(GacryptError):
    """Matrix fails the alternating property (v^t A v = 0 for all v)."""


class InvalidElement(GacryptError):
    """Value is outside the domain of the operation."""


class Malformed(GacryptError):
    """Byte string does not decode to a valid element or message."""


class TooLarge(GacryptError):
    """Exhaustive operation refused: group or set exceeds the enumeration ceiling."""


class NotNormalized(GacryptError):
    """Probability table does not sum to one."""


class StateMismatch(GacryptError):
    """Prover state does not belong to the supplied key pair."""


class NotAccepting(GacryptError):
    """Transcript fails verification where an accepting one is required."""


class SameChallenge(GacryptError):
    """Two transcripts share the same challenge; nothing can be extracted."""


class ExtractFail(GacryptError):
    """A recovered secret failed its verification equation."""


class DominantOrbitRisk(GacryptError):
    """Parameters do not rule out a dominant orbit; fake-key mode is unsound."""


class LengthMismatch(GacryptError):
    """Bit/byte string has the wrong length."""


class DimensionRule(GacryptError):
    """Attack precondition on dimensions is violated."""


class BadSetup(GacryptError):
    """Commitment setup proof is missing or does not verify."""


class RngFailure(GacryptError):
    """Rejection sampler exceeded its retry budget."""
