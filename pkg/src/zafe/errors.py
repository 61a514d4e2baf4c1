"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` so the CLI can map
failures onto exit statuses without string matching.
"""


class ZafeError(Exception):
    code = "E_COMPUTE"


class PoleError(ZafeError, ValueError):
    code = "E_POLE"


class DomainError(ZafeError, ValueError):
    code = "E_DOMAIN"


class DegenerateError(ZafeError, ValueError):
    """Parameters sit on a degenerate value (band boundary, vanishing denominator)."""

    code = "E_DEGENERATE"


class PrecisionError(ZafeError):
    code = "E_PRECISION"


class QuadratureError(ZafeError):
    code = "E_QUADRATURE"


class WindowError(QuadratureError):
    """The truncated outer u-window is too short for the requested tolerance."""


class ConvergenceError(ZafeError):
    code = "E_CONVERGENCE"


class BandError(ConvergenceError):
    """A saddle solve converged outside the band its seed was drawn from."""
