"""Exception hierarchy shared by all modules.

Validation failures (bad arguments, violated invariants) raise
``InvalidArgument``; mathematically impossible requests raise
``DomainError``; search/size limits raise ``CapacityError``.
The CLI maps these onto exit codes 2 and 3 respectively.
"""


class MetricurvError(Exception):
    """Base class for all library errors."""


class InvalidArgument(MetricurvError, ValueError):
    """Malformed input: wrong counts, violated type invariants."""


class DomainError(MetricurvError, ValueError):
    """Input is well-formed but outside the mathematical domain.

    Carries an optional ``value`` payload (e.g. the offending determinant).
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class IllConditionedError(DomainError):
    """Result would be numerically meaningless (near-linear quadruple etc.)."""


class CapacityError(MetricurvError, RuntimeError):
    """Exhaustive search refused: instance exceeds the configured cap."""


class ConnectivityError(MetricurvError, RuntimeError):
    """Graph construction produced a disconnected graph.

    ``pair`` names one separated vertex pair.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class UnstableEstimateError(MetricurvError, RuntimeError):
    """A limit-based estimator failed its convergence diagnostic."""
