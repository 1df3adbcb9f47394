"""Exception types raised across the package."""


class PhisysError(Exception):
    """Base class for all package errors."""


class NonMonotoneKernel(PhisysError):
    """s -> s*phi(s) is not strictly increasing on the sample grid."""


class ExponentOutOfRange(PhisysError):
    """Estimated growth exponents fall outside (1, N)."""


class BracketFailure(PhisysError):
    """A monotone root could not be bracketed."""


class DivergentIntegral(PhisysError):
    """An improper integral does not converge."""


class BoundViolation(PhisysError):
    """A sampled inequality failed.

    ``witness`` carries the offending sample (for instance a ``(rho, t)`` pair).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DegenerateElement(PhisysError):
    """A mesh element has zero measure."""


class NonFiniteResidual(PhisysError):
    pass


class NoConvergence(PhisysError):
    def __init__(self, message, iterations=None, residual=None, stage=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.stage = stage


class LineSearchStall(NoConvergence):
    pass


class NegativeSolution(PhisysError):
    pass


class ExponentViolation(PhisysError):
    """gamma_i + sigma_i >= ell - 1, so no a-priori radius exists."""


class ZeroBarrier(PhisysError):
    pass


class ConvexityViolation(PhisysError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HypothesisFailure(PhisysError):
    def __init__(self, message, hypothesis=None, where=None):
        super().__init__(message)
        self.hypothesis = hypothesis
        self.where = where


class OrderingViolation(PhisysError):
    def __init__(self, message, node=None, margin=None):
        super().__init__(message)
        self.node = node
        self.margin = margin


class ConfigError(PhisysError):
    pass
