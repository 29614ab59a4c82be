"""Exception hierarchy for quantcat."""


class QuantCatError(Exception):
    """Base class for all library errors."""


class InvalidPrime(QuantCatError, ValueError):
    pass


class InvalidCatMap(QuantCatError, ValueError):
    pass


class ContextMismatch(QuantCatError, ValueError):
    pass


class SingularGenerator(QuantCatError, ValueError):
    pass


class NotSpecialLinear(QuantCatError, ValueError):
    pass


class UpperTriangularMatrix(QuantCatError, ValueError):
    """Raised by the closed-form delta action when the lower-left entry vanishes."""


class NotInGroup(QuantCatError, ValueError):
    pass


class WrongPrimeType(QuantCatError, ValueError):
    pass


class UnsupportedModulus(QuantCatError, ValueError):
    pass


class ConjugatorNotFound(QuantCatError, RuntimeError):
    pass


class DegenerateReduction(QuantCatError, ValueError):
    """A reduces to a scalar matrix mod p, so its centralizer is all of SL2(F_p)."""
