"""Exception hierarchy shared by every module."""


class SysRiskError(Exception):
    """Base class for all library errors."""


class ValidationError(SysRiskError, ValueError):
    """Bad parameters or configuration. The CLI maps these to exit code 1."""


class InvalidDistribution(ValidationError):
    pass


class DegenerateEtaSB(ValidationError):
    pass


class NonPositiveLiability(ValidationError):
    pass


class MissingField(ValidationError):
    def __init__(self, field):
        super().__init__(f"missing config field: {field!r}")
        self.field = field


class RequiresDeterministicY(ValidationError):
    pass


class RequiresIndicatorEta(ValidationError):
    pass


class EpsilonExceedsY(ValidationError):
    pass


class HypothesisViolated(ValidationError):
    def __init__(self, inequality):
        super().__init__(f"hypothesis violated: {inequality}")
        self.inequality = inequality


class MissingRecoveryParams(ValidationError):
    pass


class ZeroEtaBar(SysRiskError):
    pass


class DimensionMismatch(SysRiskError, ValueError):
    pass


class NoConvergence(SysRiskError):
    """Iteration budget exhausted. The CLI maps this to exit code 2."""

    def __init__(self, residual, iterations):
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class NoConsistentRegime(SysRiskError):
    pass
