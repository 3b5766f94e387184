"""
Error handling utilities for the numerics toolkit.
Provides the exception hierarchy, exit-code mapping and fallback decorators.
"""

from functools import wraps
import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


class NumericsError(Exception):
    """Base exception for toolkit errors."""

    module = "core"

    def __init__(self, message: str = "", module: str = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ConfigError(NumericsError):
    """Raised when a configuration key or value is invalid."""
    module = "cli"


class PoleError(NumericsError):
    """Raised when a gamma function is evaluated at a pole."""
    module = "specfun"


class DomainError(NumericsError):
    """Raised when a special function argument is outside its domain."""
    module = "specfun"


class NoValidContour(NumericsError):
    """Raised when no contour separates the pole ladders."""
    module = "foxh"


class ContourViolation(NumericsError):
    """Raised when a supplied plan does not satisfy the separation rule."""
    module = "foxh"


class NoConvergence(NumericsError):
    """Raised when a refinement budget is exhausted."""
    module = "foxh"


class DimensionCap(NumericsError):
    """Raised when an integrand or sum exceeds the supported dimension."""
    module = "foxh"


class QuadratureFailure(NumericsError):
    """Raised when the quadrature oracle does not converge."""
    module = "channel"


class SeriesSingularity(NumericsError):
    """Raised when the Laguerre series is evaluated at p = eta."""
    module = "channel"


class NonIntegerClusters(NumericsError):
    """Raised when the physical sampler gets non-integer cluster counts."""
    module = "channel"


class InversionFailure(NumericsError):
    """Raised when the numerical inverse Laplace transform fails."""
    module = "rrs"


class EmptyInput(NumericsError):
    """Raised when an estimator receives no samples."""
    module = "montecarlo"


class AcceptanceFailure(NumericsError):
    """Raised when a reproduction target is missed."""
    module = "cli"


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the command-line exit status.

    Args:
        error: Raised exception

    Returns:
        Exit status (2 config, 3 numerical, 4 acceptance)
    """
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, AcceptanceFailure):
        return EXIT_ACCEPTANCE
    return EXIT_NUMERICAL


def handle_command_errors(func):
    """
    Decorator for CLI commands.
    Logs failures and converts them into exit statuses.

    Args:
        func: Command function returning an exit status

    Returns:
        Wrapped function that never raises NumericsError
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            logger.error(f"Configuration error in {func.__name__}: {e}")
            return EXIT_CONFIG
        except AcceptanceFailure as e:
            logger.error(f"Acceptance failure in {func.__name__}: {e}")
            return EXIT_ACCEPTANCE
        except NumericsError as e:
            logger.error(f"Numerical failure in {func.__name__}: {e}", exc_info=True)
            return EXIT_NUMERICAL

    return wrapper


def with_fallback(fallback_name: str, level: int = logging.WARNING):
    """
    Decorator for methods with a slower fallback path.
    On NoConvergence or DimensionCap the call is rerouted to the method
    named `fallback_name` on the same instance with the same arguments.

    Args:
        fallback_name: Attribute name of the fallback method
        level: Logging level of the reroute message

    Returns:
        Decorator
    """
    def decorator(func):
        @wraps(func)
        def wrapper(self, *args, **kwargs):
            try:
                return func(self, *args, **kwargs)
            except (NoConvergence, DimensionCap) as e:
                logger.log(level, f"{func.__name__} fell back to {fallback_name}: {e}")
                return getattr(self, fallback_name)(*args, **kwargs)

        return wrapper

    return decorator
