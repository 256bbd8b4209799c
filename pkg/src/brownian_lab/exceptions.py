"""Exception hierarchy. Every error carries an optional ``witness``."""


class BrownianLabError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UniverseTooLarge(BrownianLabError, ValueError):
    pass


class NotASemiring(BrownianLabError, ValueError):
    pass


class NotAdditive(BrownianLabError, ValueError):
    pass


class NotOuterMeasure(BrownianLabError, ValueError):
    pass


class NotProjective(BrownianLabError, ValueError):
    pass


class DimensionMismatch(BrownianLabError, ValueError):
    pass


class NotPSD(BrownianLabError, ValueError):
    pass


class NotSymmetric(BrownianLabError, ValueError):
    pass


class NonCentered(BrownianLabError, ValueError):
    pass


class BadPartition(BrownianLabError, ValueError):
    pass


class NotASubset(BrownianLabError, ValueError):
    pass


class InvalidMetric(BrownianLabError, ValueError):
    pass


class TooLargeForExact(BrownianLabError, ValueError):
    pass


class EmptyGrid(BrownianLabError, ValueError):
    pass


class BadScaleWindow(BrownianLabError, ValueError):
    pass


class CardinalityExceeded(BrownianLabError, ValueError):
    pass


class ContractUnsatisfiable(BrownianLabError, RuntimeError):
    pass


class BadExponents(BrownianLabError, ValueError):
    pass


class DivergentSeries(BrownianLabError, ArithmeticError):
    def __init__(self, message, critical_exponent=None):
        super().__init__(message, witness=critical_exponent)
        self.critical_exponent = critical_exponent


class DegenerateGrid(BrownianLabError, ValueError):
    pass


class NotARefinement(BrownianLabError, ValueError):
    pass


class GridMismatch(BrownianLabError, ValueError):
    pass


class EmptySample(BrownianLabError, ValueError):
    pass


class BadSplit(BrownianLabError, ValueError):
    pass


class UnknownSuite(BrownianLabError, ValueError):
    pass
