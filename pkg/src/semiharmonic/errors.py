"""Exception types shared across the package."""


class SemiharmonicError(Exception):
    """Base class for all errors raised by this package."""


class InvalidElement(SemiharmonicError, KeyError):
    """An element key is not valid for the semigroup it was used with."""

    def __str__(self):
        return Exception.__str__(self)


class MalformedTable(SemiharmonicError, ValueError):
    """A Cayley table is not square or has out-of-range entries."""


class NoGenerators(SemiharmonicError, ValueError):
    """A ball was requested from a backend without a generating set."""


class SupportOverflow(SemiharmonicError, ArithmeticError):
    """A support or carrier grew past the configured cap."""

    def __init__(self, message, size=None, cap=None, stage=None):
        super().__init__(message)
        self.size = size
        self.cap = cap
        self.stage = stage


class NotClosed(SemiharmonicError, ValueError):
    """A carrier that must be multiplicatively closed is not."""


class NotProbability(SemiharmonicError, ValueError):
    """A measure that must have total mass exactly one does not."""


class AbsoluteContinuityError(SemiharmonicError, ValueError):
    """mu(t) > 0 at a point where the reference measure vanishes."""


class SafeCoreError(SemiharmonicError, KeyError):
    """A truncated function was evaluated outside its domain."""

    def __str__(self):
        return Exception.__str__(self)


class DegenerateMeasure(SemiharmonicError, ValueError):
    """The support of the measure does not generate the semigroup."""


class InvalidWitness(SemiharmonicError, ValueError):
    """A Reiter oracle returned a measure that misses its epsilon."""


class NotComposable(SemiharmonicError, ValueError):
    """source(gamma) != target(eta) for an attempted composition."""


class WellDefinednessError(SemiharmonicError, ValueError):
    """An induced quotient product depends on class representatives."""


class NotClassConstant(SemiharmonicError, ValueError):
    """A function does not descend to the quotient."""


class CapExceeded(SemiharmonicError, ValueError):
    """An exhaustive search was asked to run on too large an input."""
