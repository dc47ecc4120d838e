"""Exception hierarchy for resodyn."""


class ResodynError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ResodynError, ValueError):
    """An input violates a type invariant."""


class DivergentIntegral(ResodynError, ArithmeticError):
    pass


class NoConvergence(ResodynError, ArithmeticError):
    pass


class DivisionByZero(ResodynError, ZeroDivisionError):
    pass


class DegenerateDenominator(ResodynError, ZeroDivisionError):
    pass


class DegenerateAtRequestedPoint(ResodynError):
    """Two resonances collide, so continuation labels are ambiguous.

    ``pairs`` holds the colliding label pairs.
    """

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)


class ExceptionalPoint(ResodynError):
    """Eigenvectors coalesce (spin-boson at gamma == gamma_star)."""


class SigmaNotZero(ResodynError, ValueError):
    pass


class DimensionCapExceeded(ResodynError, ValueError):
    pass


class ConfigError(ResodynError, ValueError):
    """Malformed run configuration. ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ComputeError(ResodynError):
    pass
