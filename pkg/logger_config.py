import os
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Optional

import numpy as np
import structlog

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
MAX_LOG_BYTES = 10 * 1024 * 1024


def plain_numbers(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """
    Structlog processor turning numpy scalars and small arrays into JSON-ready values.

    Solver diagnostics are numpy objects; ``np.int64`` in particular is not
    accepted by the JSON renderer.
    """
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            event_dict[key] = value.tolist() if value.size <= 16 else f"<array {value.shape}>"
    return event_dict


def log_file_name(command: Optional[str] = None) -> str:
    """``rshrink.log`` for library use, ``rshrink_<command>.log`` per CLI command."""
    if not command:
        return 'rshrink.log'
    return f"rshrink_{command.replace('-', '_')}.log"


def configure_logging(
    log_level: Optional[str] = None,
    log_dir: Optional[str] = None,
    command: Optional[str] = None
):
    """
    Route stdlib and structlog output to stderr and a size-rotated JSON log file

    Args:
        log_level (str, optional): Logging level. Defaults to $LOG_LEVEL or INFO.
        log_dir (str, optional): Directory for log files. Defaults to ./logs.
        command (str, optional): CLI command, used to name the log file

    Returns:
        structlog logger instance
    """
    log_level = (log_level or os.getenv('LOG_LEVEL', 'INFO')).upper()
    numeric_level = getattr(logging, log_level)

    log_dir = log_dir or os.path.join(os.getcwd(), 'logs')
    os.makedirs(log_dir, exist_ok=True)

    logging.basicConfig(
        level=numeric_level,
        format=LOG_FORMAT,
        handlers=[
            # stdout is left to results
            logging.StreamHandler(sys.stderr),
            RotatingFileHandler(
                os.path.join(log_dir, log_file_name(command)),
                maxBytes=MAX_LOG_BYTES,
                backupCount=5
            ),
        ],
        force=True
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            plain_numbers,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer()
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    logger = structlog.get_logger('rshrink')
    _init_error_tracking(numeric_level, logger)
    return logger


def _init_error_tracking(numeric_level: int, logger) -> None:
    """Sentry reporting for solver failures, enabled only when SENTRY_DSN is set."""
    sentry_dsn = os.getenv('SENTRY_DSN', '')
    if not sentry_dsn:
        return
    try:
        import sentry_sdk
        from sentry_sdk.integrations.logging import LoggingIntegration

        sentry_sdk.init(
            dsn=sentry_dsn,
            integrations=[LoggingIntegration(level=numeric_level, event_level=logging.ERROR)],
            traces_sample_rate=0.0
        )
    except ImportError:
        logger.warning("Sentry SDK not installed. Error tracking disabled.")
    except Exception as e:
        logger.error(f"Failed to initialize Sentry: {e}")


def bind_run_context(**values: Any) -> None:
    """Attach run-wide fields (command, config path, seed) to every later log event."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**values)


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str = 'rshrink'):
    """
    Convenience method to get a logger

    Args:
        name (str, optional): Logger name. Defaults to 'rshrink'.

    Returns:
        structlog logger instance
    """
    return structlog.get_logger(name)
