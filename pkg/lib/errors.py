"""Error types raised by the analysis library."""


class ConfhorError(Exception):
    """Base class for every library error"""


class LinearAlgebraError(ConfhorError):
    pass


class Singular(LinearAlgebraError):
    pass


class IllConditioned(LinearAlgebraError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DomainExceeded(ConfhorError):
    pass


class ChartError(ConfhorError):
    pass


class OutOfRange(ChartError):
    pass


class NotInvertible(ChartError):
    pass


class PatchViolation(ChartError):
    pass


class ChartInvalid(ChartError):
    pass


class NotTemporalGauge(ConfhorError):
    pass


class NoSignChange(ConfhorError):
    pass


class Degenerate(ConfhorError):
    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class HypothesisViolated(ConfhorError):
    pass


class NonCausalZ(ConfhorError):
    pass


class BranchMismatch(ConfhorError):
    pass


class InvalidSigma(ConfhorError):
    pass


class DenominatorVanishes(ConfhorError):
    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ConvergenceError(ConfhorError):
    pass


class NonConvergent(ConvergenceError):
    pass


class InconclusiveRefinement(ConvergenceError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class ConfigError(ConfhorError):
    def __init__(self, message, line=None, field=None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{', '.join(location)}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field
