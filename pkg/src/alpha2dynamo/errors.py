"""Exception hierarchy shared by the solver modules."""


class InvalidParameterError(ValueError):
    pass


class DiscretizationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


class BlowUpError(NumericalFailure):
    """State overflow during integration; ``last_x`` is the last finite abscissa."""

    def __init__(self, message, last_x):
        super().__init__(message)
        self.last_x = last_x


class JordanRegimeError(ValueError):
    """Raised where a formula divides by epsilon and |epsilon| is too small.

    Near the Jordan point use :mod:`alpha2dynamo.perturbation` instead.
    """


class PoleError(ValueError):
    """The factorization seed has a node, so the superpotential has a pole."""


class SolvabilityError(NumericalFailure):
    pass


class DegenerateQuadratureError(NumericalFailure):
    pass


class UndefinedRatioError(ZeroDivisionError):
    pass
