"""Exception hierarchy for the lattice-counting engine.

Every failure mode that callers are expected to branch on gets its own
class; anything else is a plain bug and raises whatever Python raises.
"""


class EngineError(Exception):
    """Base class for all engine-level errors."""


class IndeterminateValuation(EngineError):
    """All known coefficients vanish but the element is not exactly zero.

    The valuation cannot be certified at the current working precision.
    Callers may escalate precision and retry.
    """


class PrecisionExhausted(EngineError):
    """A computation needs coefficients beyond the working precision."""


class NotAGenerator(EngineError):
    """gamma does not generate its extension over the base series field."""


class NotAntiHermitian(EngineError):
    """tau(gamma) != -gamma."""


class NotInFixedField(EngineError):
    """Element expected in the tau-fixed subfield is not tau-fixed."""


class FactorsNotCoprime(EngineError):
    """Two factor polynomials share a root (zero resultant)."""


class CharacteristicTooSmall(EngineError):
    """The residue characteristic p does not exceed the total degree."""


class InconsistentInvariants(EngineError):
    """Two independent formulas for the same invariant disagree."""


class RankDeficient(EngineError):
    """Matrix columns are linearly dependent at working precision."""


class NotStable(EngineError):
    """Lattice is not stable under multiplication by gamma."""


class SearchTooLarge(EngineError):
    """Enumeration window dimension exceeds the configured cap."""


class ClassNotAdmissible(EngineError):
    """Requested discriminant class has nonzero total parity."""


class SchemaError(EngineError):
    """Instance file violates the input schema.

    Carries a JSON-pointer style path to the offending location.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class UnknownFieldError(SchemaError):
    """Instance file contains a key outside the schema."""
