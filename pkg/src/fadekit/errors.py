"""Exception hierarchy shared by all fadekit modules."""


class FadekitError(Exception):
    """Base class for every error raised by fadekit."""


class InvalidParams(FadekitError, ValueError):
    """Model parameters outside their valid domain."""


class KappaTooSmall(InvalidParams):
    """kappa below the floor where the signed mixture weights blow up."""


class IllConditionedMixture(FadekitError, ArithmeticError):
    """The constructed weights fail the unit-sum check."""


class NegativeInput(FadekitError, ValueError):
    pass


class NonPositiveInput(FadekitError, ValueError):
    pass


class OutOfRegion(FadekitError, ValueError):
    """MGF argument outside the region of convergence."""


class NoConvergence(FadekitError, ArithmeticError):
    pass


class QuadratureFailure(FadekitError, ArithmeticError):
    pass


class InternalConsistencyError(FadekitError, ArithmeticError):
    """A mixture evaluation produced a negative value beyond rounding noise."""


class RegimeMismatch(FadekitError, ValueError):
    pass


class MetricEvaluationFailure(FadekitError, ArithmeticError):
    pass


class ParseError(FadekitError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TooFewSamples(FadekitError, ValueError):
    pass


class DegenerateSample(FadekitError, ValueError):
    pass


class NoFeasibleCandidate(FadekitError, RuntimeError):
    pass
