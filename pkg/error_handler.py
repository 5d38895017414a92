import traceback
import logging
from enum import Enum, auto
from typing import Any, Dict, List, Optional

import sentry_sdk


class ErrorSeverity(Enum):
    """Severity levels for errors"""
    LOW = auto()
    MEDIUM = auto()
    HIGH = auto()
    CRITICAL = auto()


class ShrinkageError(Exception):
    """Base exception for estimator, likelihood and experiment errors"""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        context: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize a ShrinkageError

        Args:
            message (str): Error description
            error_code (str, optional): Unique error identifier
            severity (ErrorSeverity): Error severity level
            context (dict, optional): Additional error context
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self._generate_error_code()
        self.severity = severity
        self.context = context or {}

        self._log_error()
        self._report_error()

    def _generate_error_code(self) -> str:
        """
        Generate an error code based on the error message

        Returns:
            str: Generated error code
        """
        import hashlib
        return hashlib.md5(self.message.encode()).hexdigest()[:8]

    def _log_error(self) -> None:
        """Log error using the logging system"""
        logger = logging.getLogger('rshrink_error')

        log_method = {
            ErrorSeverity.LOW: logger.info,
            ErrorSeverity.MEDIUM: logger.warning,
            ErrorSeverity.HIGH: logger.error,
            ErrorSeverity.CRITICAL: logger.critical
        }.get(self.severity, logger.error)

        log_method(
            f"Error: {self.message} "
            f"(Code: {self.error_code}, "
            f"Severity: {self.severity.name})"
        )

    def _report_error(self) -> None:
        """Report error to Sentry (no-op unless a DSN was configured)"""
        try:
            sentry_sdk.capture_exception(
                error=self,
                extra={
                    'error_code': self.error_code,
                    'severity': self.severity.name,
                    'context': self.context
                }
            )
        except Exception as e:
            logging.error(f"Failed to report error to Sentry: {e}")


class NotPositiveDefinite(ShrinkageError):
    """Matrix failed the Cholesky positive-definiteness certificate"""
    def __init__(self, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Matrix is not positive definite: {reason}",
            error_code="MATRIX_NOT_PD",
            severity=ErrorSeverity.HIGH,
            context=context or {}
        )


class ZeroVector(ShrinkageError):
    """A vector that must be nonzero is (numerically) zero"""
    def __init__(self, where: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Zero vector in {where}",
            error_code="ZERO_VECTOR",
            severity=ErrorSeverity.MEDIUM,
            context=context or {}
        )


class InvalidBeta(ShrinkageError):
    """Shrinkage parameter outside the admissible interval (beta_min, 1]"""
    def __init__(self, beta: float, lower: float, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(
            message=f"beta={beta} outside admissible interval ({lower}, 1]{detail}",
            error_code="INVALID_BETA",
            severity=ErrorSeverity.MEDIUM,
            context={'beta': beta, 'lower_bound': lower}
        )
        self.beta = beta
        self.lower = lower


class NoConvergence(ShrinkageError):
    """Fixed-point iteration exhausted max_iter; carries the last iterate"""
    def __init__(self, solver: str, estimate: Any, report: Any):
        super().__init__(
            message=(
                f"{solver} did not converge in {report.iterations} iterations "
                f"(final residual {report.final_residual:.3e})"
            ),
            error_code=f"NO_CONVERGENCE_{solver.upper()}",
            severity=ErrorSeverity.MEDIUM,
            context={'solver': solver, 'iterations': report.iterations}
        )
        self.solver = solver
        self.estimate = estimate
        self.report = report


class NumericalBreakdown(ShrinkageError):
    """Quadratic form underflow or non-finite iterate"""
    def __init__(self, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Numerical breakdown: {reason}",
            error_code="NUMERICAL_BREAKDOWN",
            severity=ErrorSeverity.HIGH,
            context=context or {}
        )


class ConfigurationError(ShrinkageError):
    """Invalid experiment, solver or scenario configuration"""
    def __init__(self, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Invalid configuration: {reason}",
            error_code="CONFIG_INVALID",
            severity=ErrorSeverity.MEDIUM,
            context=context or {}
        )


class FailureBudgetExceeded(ShrinkageError):
    """Too many Monte-Carlo trials failed for the run to be reported"""
    def __init__(self, experiment: str, failed: int, trials: int, failed_ids: List[int]):
        super().__init__(
            message=f"{experiment}: {failed} of {trials} trials failed",
            error_code=f"FAILURE_BUDGET_{experiment.upper().replace('-', '_')}",
            severity=ErrorSeverity.HIGH,
            context={'failed': failed, 'trials': trials, 'failed_ids': failed_ids[:20]}
        )
        self.failed = failed
        self.trials = trials


class ErrorHandler:
    """
    Centralized error handling and management
    """

    @staticmethod
    def handle_error(
        error: Exception,
        context: Optional[Dict[str, Any]] = None
    ) -> ShrinkageError:
        """
        Handle and transform various exceptions

        Args:
            error (Exception): Original exception
            context (dict, optional): Additional context

        Returns:
            ShrinkageError: Standardized error
        """
        if isinstance(error, ShrinkageError):
            return error

        # Imported lazily, both are heavy
        import jsonschema
        from numpy.linalg import LinAlgError

        if isinstance(error, LinAlgError):
            return NotPositiveDefinite(reason=str(error), context=context)

        if isinstance(error, jsonschema.ValidationError):
            return ConfigurationError(reason=error.message, context=context)

        if isinstance(error, (FloatingPointError, OverflowError)):
            return NumericalBreakdown(reason=str(error), context=context)

        if isinstance(error, OSError):
            return ConfigurationError(reason=f"I/O failure: {error}", context=context)

        return ShrinkageError(
            message=str(error),
            severity=ErrorSeverity.HIGH,
            context={
                'original_error': type(error).__name__,
                'traceback': traceback.format_exc(),
                **(context or {})
            }
        )

    @staticmethod
    def critical_error_handler(func):
        """
        Decorator for CLI commands: normalizes any exception into the
        ShrinkageError hierarchy before re-raising it
        """
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                error = ErrorHandler.handle_error(e)
                logging.critical(f"Critical error in {func.__name__}: {error}")
                if error is e:
                    raise
                raise error from e
        wrapper.__name__ = func.__name__
        wrapper.__doc__ = func.__doc__
        return wrapper

