"""Exception types shared across the package."""


class BlsgError(Exception):
    """Base class for all package errors."""


class ParameterError(BlsgError, ValueError):
    """Invalid sizes, orders, or parameter combinations."""


class DomainError(BlsgError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedOrderError(ParameterError):
    """Derivative order beyond what the discretization supports."""


class UnsupportedModeError(ParameterError):
    """Fourier mode (typically alpha = 0) for which an operation is undefined."""


class IncompleteInputError(ParameterError):
    """A per-mode family is missing modes that the weights require."""


class NotRepresentableError(BlsgError):
    """A field lacks the smoothness or decay the grid can represent."""


class NearEigenvalueError(BlsgError):
    """A resolvent solve was requested too close to the spectrum."""

    def __init__(self, message, alpha=None, c=None, cond=None):
        super().__init__(message)
        self.alpha = alpha
        self.c = c
        self.cond = cond


class ContourGeometryError(BlsgError):
    """A contour node landed inside (or too close to) the forbidden strip."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class StiffnessError(BlsgError):
    """Time stepper failed to meet its tolerance with a sane step size."""


class SplittingError(BlsgError):
    """Fast/slow solution splitting broke down during Evans integration."""


class QuadratureError(BlsgError):
    """An adaptive quadrature failed to converge under refinement."""


class CascadeDivergenceError(BlsgError):
    """A cascade profile left the representable class (infinite norm)."""

    def __init__(self, message, j=None):
        super().__init__(message)
        self.j = j


class NoGrowingModeError(BlsgError):
    """Instability machinery invoked on a spectrally stable profile."""
