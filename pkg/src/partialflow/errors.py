"""Exception types shared across the package."""


class PartialFlowError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(PartialFlowError, ValueError):
    """An input lies outside its physical or contractual domain."""


class DryPathError(PartialFlowError):
    """An acoustic chord lies above the water line."""


class DegenerateProfileError(PartialFlowError):
    """A chord-mean velocity came out non-positive, so no correction ratio exists."""


class NumericalDomainError(PartialFlowError):
    """A non-integer power received a negative base; indicates a bug, not bad input."""


class FpcfRangeError(PartialFlowError):
    """Polynomial evaluation requested outside its fitted validity range."""

    def __init__(self, level_mm: float, h_min_mm: float, h_max_mm: float):
        self.level_mm = level_mm
        self.h_min_mm = h_min_mm
        self.h_max_mm = h_max_mm
        super().__init__(
            f"level {level_mm:g} mm outside FPCF validity range "
            f"[{h_min_mm:g}, {h_max_mm:g}] mm"
        )


class QuadratureError(PartialFlowError):
    """Adaptive refinement hit its depth limit before reaching tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to accept the partial result.
    """

    def __init__(self, estimate: float, error_bound: float, max_depth: int):
        self.estimate = estimate
        self.error_bound = error_bound
        self.max_depth = max_depth
        super().__init__(
            f"quadrature did not converge within depth {max_depth}: "
            f"estimate {estimate!r}, error bound {error_bound:.3e}"
        )


class InvalidTimesError(PartialFlowError, ValueError):
    """Transit times must be strictly positive."""


class ConfigError(PartialFlowError):
    """A run configuration file is missing, malformed, or inconsistent."""
