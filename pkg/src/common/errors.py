"""
Domain exceptions shared by every package.

Only precondition failures raise. Run-level events (blow-up, CFL trouble in a
quasilinear run, budget exhaustion, inequality violations) are reported in result
records instead.
"""


class WaveLabError(Exception):
    """Base class for all laboratory errors."""


class InvalidArgumentError(WaveLabError, ValueError):
    """An argument lies outside the operation's preconditions."""


class CoefficientBoundViolation(WaveLabError, ValueError):
    """A coefficient exceeds the hard bound sum |h^{ab}| <= 1/2."""


class ResolutionError(WaveLabError, ValueError):
    """Sampled data are too coarse for the requested mollifier scale."""


class CannotScaleError(WaveLabError, ValueError):
    """A zero data pair cannot be rescaled to a nonzero size."""


class SequencingError(WaveLabError):
    """Time levels reached an accumulator out of order, or slabs do not abut."""


class AdmissibilityFailure(WaveLabError):
    """An iterate or continuation segment left the admissible ball sup |h| <= 1/6."""

    def __init__(
        self,
        message: str,
        k: int | None = None,
        segment: int | None = None,
        sup_h: float | None = None,
        partial: object | None = None,
    ):
        super().__init__(message)
        self.k = k
        self.segment = segment
        self.sup_h = sup_h
        # Report accumulated before the failure, if any
        self.partial = partial


class LifespanOrderViolation(WaveLabError):
    """A lifespan sweep produced a shorter lifespan at a smaller data size."""


class ConfigError(WaveLabError, ValueError):
    """Run configuration is malformed; carries the offending key when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
