"""Error handling utilities for the torus observability laboratory."""

from typing import Any, Dict, Optional


class LaboratoryError(Exception):
    """Base exception for every failure raised by the laboratory."""

    pass


class EmptyEigenspaceError(LaboratoryError):
    """Raised when N is not a sum of two squares."""

    def __init__(self, N: int):
        self.N = N
        super().__init__(f"Eigenspace for N={N} is empty (N is not a sum of two squares)")


class NumericalFailureError(LaboratoryError):
    """Exception for eigensolver non-convergence."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class ConditioningError(LaboratoryError):
    """Exception for numerically singular Gram matrices."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class FitError(LaboratoryError):
    """Exception for degenerate regression inputs."""

    pass


class ReportParseError(LaboratoryError):
    """Exception for reports that cannot be read back."""

    pass


class ConfigurationError(LaboratoryError):
    """Exception for configuration errors."""

    pass


class FalsifiedAssertionError(LaboratoryError):
    """A checked mathematical claim failed; carries the evidence."""

    def __init__(self, message: str, evidence: Optional[Dict[str, Any]] = None):
        self.evidence = evidence or {}
        super().__init__(message)


EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FALSIFIED = 2


def exit_status_for(error: Optional[BaseException]) -> int:
    """
    Map an exception to a CLI exit status.

    Args:
        error: Exception raised by a run, or None on success

    Returns:
        0 on success, 2 for falsified claims, 1 otherwise
    """
    if error is None:
        return EXIT_PASS
    if isinstance(error, FalsifiedAssertionError):
        return EXIT_FALSIFIED
    return EXIT_ERROR


def validate_critical_error(error: Exception, logger: Optional[Any] = None) -> bool:
    """
    Determine if an error should halt a sweep instead of being recorded.

    Args:
        error: Exception to evaluate
        logger: Logger instance

    Returns:
        True if error is critical, False otherwise
    """
    critical_errors = (
        ConfigurationError,
        FileNotFoundError,
        PermissionError,
    )

    is_critical = isinstance(error, critical_errors)

    if is_critical and logger:
        logger.critical(f"Critical error encountered: {type(error).__name__}")

    return is_critical


class ErrorContext:
    """Context manager for handling errors with automatic logging."""

    def __init__(
        self,
        operation: str,
        logger: Optional[Any] = None,
        raise_on_error: bool = True,
    ):
        """
        Initialize error context.

        Args:
            operation: Description of operation being performed
            logger: Logger instance
            raise_on_error: Whether to re-raise exceptions
        """
        self.operation = operation
        self.logger = logger
        self.raise_on_error = raise_on_error
        self.error: Optional[BaseException] = None

    def __enter__(self):
        if self.logger:
            self.logger.debug(f"Starting: {self.operation}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is not None:
            self.error = exc_val
            if self.logger:
                if isinstance(exc_val, FalsifiedAssertionError):
                    self.logger.warning(f"{self.operation}: claim falsified - {exc_val}")
                else:
                    self.logger.error(
                        f"Error in {self.operation}: {exc_type.__name__} - {exc_val}",
                        exc_info=not isinstance(exc_val, LaboratoryError),
                    )

            if self.raise_on_error:
                return False

            return True

        if self.logger:
            self.logger.debug(f"Completed: {self.operation}")
        return True


def format_error_for_report(error: Exception, context: Optional[str] = None) -> dict:
    """
    Format error information for inclusion in reports.

    Args:
        error: Exception to format
        context: Additional context information

    Returns:
        Dictionary with formatted error information
    """
    details: Dict[str, Any] = {
        "error_type": type(error).__name__,
        "error_message": str(error),
        "context": context,
        "is_critical": validate_critical_error(error),
    }
    for attr in ("diagnostics", "evidence"):
        value = getattr(error, attr, None)
        if value:
            details[attr] = value
    return details
