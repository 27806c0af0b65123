"""Exception hierarchy."""


class DelsarteError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DelsarteError, ValueError):
    """The exponent configuration is malformed or violates an invariant."""


class DependentColumns(ConfigError):
    pass


class NotInterior(ConfigError):
    """a0 is outside the span of A or not strictly inside its convex hull."""


class WeightMismatch(ConfigError):
    pass


class NonIntegral(DelsarteError, ArithmeticError):
    """An integrality guard failed; indicates an arithmetic bug."""


class DifferentCosets(DelsarteError, ValueError):
    pass


class NotInM(DelsarteError, ValueError):
    """The exponent is not a lattice point of the cone C(A)."""


class NotReducible(DelsarteError, ValueError):
    pass


class PoleInBracket(DelsarteError, ZeroDivisionError):
    pass


class PoleInPochhammer(DelsarteError, ZeroDivisionError):
    pass


class LogarithmicCase(DelsarteError):
    """Repeated local exponents: some solutions involve log terms."""


class TruncationTooSmall(DelsarteError):
    pass
