import logging
from typing import Optional

# One logger for the whole package. It stays silent until an application (or the
# tri-dm command) attaches a handler through configure_logger.

LOGGER_NAME = "tridm"
LOG_FORMAT = "%(name)s: %(levelname)s: %(message)s"

_logger = logging.getLogger(LOGGER_NAME)
_logger.addHandler(logging.NullHandler())


def get_logger() -> logging.Logger:
    """Logger that sweeps, the closed-form validator and the command line write to."""
    return _logger


def set_logger(logger: logging.Logger) -> None:
    global _logger
    _logger = logger


def configure_logger(
    *,
    level: int = logging.INFO,
    handler: Optional[logging.Handler] = None,
    propagate: bool = False,
) -> logging.Logger:
    """
    Set the level of the package logger and optionally route it to ``handler``.

    A handler without a formatter gets ``LOG_FORMAT``, so records read
    ``tridm: WARNING: ...`` on a terminal. Without a handler the existing ones
    are kept.
    """
    logger = get_logger()
    logger.setLevel(level)
    logger.propagate = propagate
    if handler is not None:
        if handler.formatter is None:
            handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.handlers = [handler]
    elif not logger.handlers:
        logger.addHandler(logging.NullHandler())
    return logger
