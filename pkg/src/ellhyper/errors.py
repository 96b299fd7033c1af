"""Exception hierarchy shared by all numerical modules."""


class EllhyperError(Exception):
    """Base class for all library errors."""


class DomainError(EllhyperError):
    """Input outside the direct domain of definition of a function."""


class PoleError(DomainError):
    """Evaluation point too close to a pole or zero lattice.

    ``location`` carries the offending lattice index or point when known.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConvergenceError(EllhyperError):
    """Refinement budget exhausted without meeting the tolerance.

    ``last_values`` holds the two final refinement-level values.
    """

    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


class TruncationError(EllhyperError):
    """Integrand has not decayed at the truncation radius."""


class DivergenceError(EllhyperError):
    """Bilateral sum shows no decay over consecutive shells."""


class PinchingError(EllhyperError):
    """Ascending and descending pole sequences collide on the contour."""
