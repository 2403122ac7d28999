"""Exception hierarchy shared by all modules."""


class LrdTrendError(Exception):
    """Base class for every error raised by the package."""


class EmbeddingFailure(LrdTrendError):
    """Circulant embedding produced eigenvalues that are too negative."""


class NotPositiveDefinite(LrdTrendError):
    """Dense Cholesky factorisation of a Toeplitz covariance failed."""


class QuadratureUnstable(LrdTrendError):
    """A quadrature result changed too much when the node budget was doubled."""


class IndexOutOfRange(LrdTrendError, IndexError):
    """An integer observation time lies outside the simulated path."""


class DegenerateCell(LrdTrendError):
    """A jittered design kept producing colliding observation times."""


class OrderTooHigh(LrdTrendError, ValueError):
    """Requested kernel derivative exceeds v + 1."""


class CertificationFailure(LrdTrendError):
    """A kernel violates one of the kernel assumptions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("kernel certification failed: " + "; ".join(self.violations))


class BandwidthTooSmall(LrdTrendError, ValueError):
    """Some interior evaluation point has no observations inside its window."""


class BandwidthTooLarge(LrdTrendError, ValueError):
    """Bandwidth is not below 1/2."""


class InfeasibleWindow(LrdTrendError):
    """The admissible bandwidth window is empty."""


class DegenerateLimit(LrdTrendError):
    """The limiting variance is zero, so the standardised statistic is undefined."""


class ConfigError(LrdTrendError, ValueError):
    """An experiment configuration is malformed or violates a model condition."""
